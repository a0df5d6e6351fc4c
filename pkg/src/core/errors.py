class PallorError(ValueError):
    """
    Base class for every error raised by the pallor pipeline
    """


class UnsupportedFormat(PallorError):
    pass


class CorruptFile(PallorError):
    pass


class InvalidDimensions(PallorError):
    pass


class MissingColumn(PallorError):
    def __init__(self, column):
        super().__init__(f"Manifest is missing required column '{column}'")
        self.column = column


class DuplicateImageId(PallorError):
    def __init__(self, image_id):
        super().__init__(f"Image id '{image_id}' appears more than once in the manifest")
        self.image_id = image_id


class ImageTooSmall(PallorError):
    pass


class EmptyMask(PallorError):
    pass


class DegenerateShape(PallorError):
    pass


class CoincidentPoints(PallorError):
    pass


class DegenerateRegion(PallorError):
    pass


class DivisionDegenerate(PallorError):
    pass


class MissingZone(PallorError):
    pass


class DimensionMismatch(PallorError):
    pass


class EmptyGroundTruth(PallorError):
    pass


class EmptyList(PallorError):
    pass


class InvalidScene(PallorError):
    pass


class NoiseNotSupported(PallorError):
    pass


class MissingReferenceStats(PallorError):
    pass


class ConfigError(PallorError):
    pass


class ProvisionError(PallorError):
    """
    Raised by a provider that could not supply a segmentation bundle

    Args:
        failure (ProvisionFailure): Which part of the bundle is missing
        detail (str): Human readable context
    """

    def __init__(self, failure, detail=""):
        message = failure.value if not detail else f"{failure.value}: {detail}"
        super().__init__(message)
        self.failure = failure
        self.detail = detail


class MissingFile(PallorError):
    pass
