import logging

import numpy as np
from PIL import Image
from skimage import exposure

from ..core.errors import ImageTooSmall
from ..core.schemas import PointPx, PreprocessedImage, as_fundus_image

logger = logging.getLogger(__name__)

# Rec.601 luma weights
GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def pad_sides(image, border_px=300):
    """
    Add a border of zero columns to the left and right of an image

    Args:
        image (numpy.ndarray): FundusImage or BinaryMask
        border_px (int): Columns added on each side

    Returns:
        numpy.ndarray: Raster widened by 2 * border_px
    """
    if border_px < 0:
        raise ValueError("border_px must be non-negative")
    image = np.asarray(image)
    if border_px == 0:
        return image.copy()
    pad = [(0, 0), (border_px, border_px)] + [(0, 0)] * (image.ndim - 2)
    return np.pad(image, pad, mode="constant", constant_values=0)


def resize_to_height(image, target_h=2166, pad_px=0, original_size=None):
    """
    Resize an image to a fixed height keeping its aspect ratio (bilinear)

    Args:
        image (numpy.ndarray): FundusImage, usually already padded
        target_h (int): Output height
        pad_px (int): Padding already applied, recorded for coordinate mapping
        original_size (tuple): (width, height) before padding

    Returns:
        PreprocessedImage: Resized image plus the scale factor
    """
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    image = as_fundus_image(image)
    height, width = image.shape[:2]
    if original_size is None:
        original_size = (width - 2 * pad_px, height)

    scale = target_h / height
    if height == target_h:
        resized = image.copy()
    else:
        new_width = max(1, int(np.floor(width * scale + 0.5)))
        resized = np.asarray(Image.fromarray(image).resize((new_width, target_h), resample=Image.Resampling.BILINEAR))

    return PreprocessedImage(
        image=resized,
        scale_factor=scale,
        pad_px=pad_px,
        original_width=original_size[0],
        original_height=original_size[1],
    )


def preprocess(image, border_px=300, target_h=2166):
    """
    Pad then resize, as the measurement pipeline expects
    """
    image = as_fundus_image(image)
    original_size = (image.shape[1], image.shape[0])
    padded = pad_sides(image, border_px)
    return resize_to_height(padded, target_h, pad_px=border_px, original_size=original_size)


def to_preprocessed_point(point, prep):
    """
    Map an original-frame point into the preprocessed frame: ((x + pad) * scale, y * scale)
    """
    return PointPx(x=(point.x + prep.pad_px) * prep.scale_factor, y=point.y * prep.scale_factor)


def to_preprocessed_frame(mask, prep):
    """
    Pad and nearest-neighbour rescale an original-frame mask onto the preprocessed frame
    """
    mask = np.asarray(mask).astype(bool)
    padded = pad_sides(mask, prep.pad_px)
    if padded.shape == (prep.height, prep.width):
        return padded
    resized = Image.fromarray(padded.astype(np.uint8) * 255).resize((prep.width, prep.height), resample=Image.Resampling.NEAREST)
    return np.asarray(resized) >= 128


def to_gray(image):
    """
    Convert an RGB raster to real-valued greyscale without re-quantizing

    Returns:
        numpy.ndarray: float64 grey levels, 0.299 R + 0.587 G + 0.114 B
    """
    image = np.asarray(image, dtype=np.float64)
    return image[..., 0] * GRAY_WEIGHTS[0] + image[..., 1] * GRAY_WEIGHTS[1] + image[..., 2] * GRAY_WEIGHTS[2]


def clahe(gray, tiles=8, clip_limit=0.01):
    """
    Contrast limited adaptive histogram equalization for display

    Args:
        gray (numpy.ndarray): GrayImage in the 0-255 range
        tiles (int): Tiles along each axis
        clip_limit (float): Histogram clip limit as a fraction

    Returns:
        numpy.ndarray: Enhanced GrayImage in [0, 255]
    """
    gray = np.asarray(gray, dtype=np.float64)
    height, width = gray.shape
    if height < tiles or width < tiles:
        raise ImageTooSmall(f"Image {width}x{height} is smaller than the {tiles}x{tiles} tile grid")
    if np.ptp(gray) == 0:
        return gray.copy()

    kernel_size = (max(1, height // tiles), max(1, width // tiles))
    scaled = np.clip(gray, 0, 255) / 255.0
    enhanced = exposure.equalize_adapthist(scaled, kernel_size=kernel_size, clip_limit=clip_limit, nbins=256)
    return np.clip(enhanced * 255.0, 0, 255)
