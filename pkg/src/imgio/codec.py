import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..core.errors import CorruptFile, InvalidDimensions, UnsupportedFormat

logger = logging.getLogger(__name__)

SUPPORTED_FORMATS = ("PNG", "JPEG", "BMP", "TIFF")

# Leading bytes of the supported containers, used to tell a damaged file from a foreign one
_MAGIC = (
    b"\x89PNG\r\n\x1a\n",
    b"\xff\xd8",
    b"BM",
    b"II*\x00",
    b"MM\x00*",
)


def _to_rgb_array(image):
    mode = image.mode
    if mode == "RGB":
        return np.asarray(image, dtype=np.uint8)
    if mode.startswith("I;16") or mode == "I":
        # 16-bit greyscale keeps its high byte
        grey = np.asarray(image).astype(np.uint32)
        grey = (grey >> 8).clip(0, 255).astype(np.uint8)
        return np.repeat(grey[:, :, None], 3, axis=2)
    if mode == "F":
        grey = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
        return np.repeat(grey[:, :, None], 3, axis=2)
    if mode in ("L", "1", "LA"):
        grey = np.asarray(image.convert("L"), dtype=np.uint8)
        return np.repeat(grey[:, :, None], 3, axis=2)
    if mode in ("P", "PA"):
        image = image.convert("RGBA")
    # RGBA, CMYK, YCbCr and friends: alpha is discarded, not composited
    return np.asarray(image.convert("RGB"), dtype=np.uint8)


def decode_image_with_format(data):
    """
    Decode an encoded image into an 8-bit RGB raster

    Args:
        data (bytes): Raw file contents (PNG, JPEG, BMP or TIFF)

    Returns:
        tuple: (FundusImage, format name)
    """
    try:
        image = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as e:
        if data.startswith(_MAGIC):
            raise CorruptFile(f"Image data could not be parsed: {e}") from e
        raise UnsupportedFormat("Image data is not PNG, JPEG, BMP or TIFF") from e

    if image.format not in SUPPORTED_FORMATS:
        raise UnsupportedFormat(f"Unsupported image format {image.format}")

    try:
        image.load()
        array = _to_rgb_array(image)
    except (OSError, SyntaxError, ValueError) as e:
        raise CorruptFile(f"{image.format} data is damaged or truncated: {e}") from e

    if array.shape[0] == 0 or array.shape[1] == 0:
        raise CorruptFile("Decoded image has no pixels")
    return np.ascontiguousarray(array), image.format


def decode_image(data):
    """
    Decode PNG, JPEG, BMP or TIFF bytes into a FundusImage; greyscale is replicated and alpha dropped
    """
    return decode_image_with_format(data)[0]


def read_image(path):
    """
    Read an image file from disk

    Returns:
        tuple: (FundusImage, format name)
    """
    return decode_image_with_format(Path(path).read_bytes())


def encode_png(raster):
    """
    Encode an image or mask as lossless PNG

    Args:
        raster (numpy.ndarray): FundusImage, GrayImage or BinaryMask

    Returns:
        bytes: PNG file contents; masks become 1-channel {0, 255}
    """
    array = np.asarray(raster)
    if array.ndim < 2 or array.shape[0] == 0 or array.shape[1] == 0:
        raise InvalidDimensions(f"Cannot encode a raster of shape {array.shape}")

    if array.dtype == bool:
        array = array.astype(np.uint8) * 255
    elif array.dtype != np.uint8:
        array = np.clip(np.rint(array), 0, 255).astype(np.uint8)

    if not (array.ndim == 2 or (array.ndim == 3 and array.shape[2] in (3, 4))):
        raise InvalidDimensions(f"Cannot encode a raster of shape {array.shape}")

    buffer = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(array)).save(buffer, format="PNG")
    return buffer.getvalue()


def write_png(path, raster):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png(raster))
    return path


def read_mask(path, threshold=128):
    """
    Read a mask sidecar file; any channel layout is reduced to grey and thresholded at >= threshold
    """
    try:
        image = Image.open(Path(path))
        image.load()
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as e:
        raise UnsupportedFormat(f"Mask {path} is not a supported image") from e
    except (OSError, SyntaxError, ValueError) as e:
        raise CorruptFile(f"Mask {path} is damaged: {e}") from e

    if image.mode == "1":
        return np.asarray(image, dtype=bool)
    if image.mode.startswith("I") or image.mode == "F":
        grey = _to_rgb_array(image)[:, :, 0]
    else:
        grey = np.asarray(image.convert("L"))
    return grey >= threshold
