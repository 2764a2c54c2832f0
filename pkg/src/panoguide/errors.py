"""Exception types shared across the engine."""


class PanoguideError(Exception):
    """Base class for all engine errors."""


# -- session store ------------------------------------------------------

class MissingManifest(PanoguideError):
    pass


class MalformedRecord(PanoguideError):
    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {detail}")


class NonMonotonicFrameIndex(PanoguideError):
    pass


class DimensionMismatch(PanoguideError):
    pass


class IoFailure(PanoguideError):
    pass


# -- geometry / kinematics ----------------------------------------------

class DegenerateVector(PanoguideError):
    pass


class OutOfFrame(PanoguideError):
    pass


class BehindCamera(PanoguideError):
    pass


class OutOfFov(PanoguideError):
    pass


class DegenerateMarker(PanoguideError):
    pass


class NoMarkerEver(PanoguideError):
    pass


# -- command analysis ----------------------------------------------------

class EmptySeries(PanoguideError):
    pass


class AllAbsent(PanoguideError):
    pass


class TooFewSamples(PanoguideError):
    pass


class DegenerateClusters(PanoguideError):
    pass


# -- haptics / cues ------------------------------------------------------

class InsufficientCalibration(PanoguideError):
    pass


class AnalysisMissing(PanoguideError):
    pass


class ArmAbsent(PanoguideError):
    pass


# -- fixtures ------------------------------------------------------------

class OverlappingEpochs(PanoguideError):
    pass


# -- replay service ------------------------------------------------------

class UnknownSession(PanoguideError):
    pass


class MalformedMessage(PanoguideError):
    pass


class OutOfOrderPose(PanoguideError):
    pass
