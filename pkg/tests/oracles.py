"""
Brute-force reference implementations used to check the fast raster operations
"""
from collections import deque

import numpy as np

EIGHT = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
FOUR = [(-1, 0), (1, 0), (0, -1), (0, 1)]


def components(mask, steps=EIGHT):
    """Connected components in raster order of their first pixel"""
    mask = np.asarray(mask, dtype=bool)
    height, width = mask.shape
    seen = np.zeros_like(mask)
    found = []
    for y in range(height):
        for x in range(width):
            if not mask[y, x] or seen[y, x]:
                continue
            pixels = []
            queue = deque([(y, x)])
            seen[y, x] = True
            while queue:
                cy, cx = queue.popleft()
                pixels.append((cy, cx))
                for dy, dx in steps:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < height and 0 <= nx < width and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            found.append(pixels)
    return found


def keep_largest(mask):
    comps = components(mask)
    best = min(comps, key=lambda c: (-len(c), min(p[0] for p in c), min(p[1] for p in c)))
    out = np.zeros(np.shape(mask), dtype=bool)
    for y, x in best:
        out[y, x] = True
    return out


def fill_holes(mask):
    """Background not reachable from the border through 4-connected background becomes foreground"""
    mask = np.asarray(mask, dtype=bool)
    height, width = mask.shape
    reached = np.zeros_like(mask)
    queue = deque()
    for y in range(height):
        for x in range(width):
            on_border = y in (0, height - 1) or x in (0, width - 1)
            if on_border and not mask[y, x]:
                reached[y, x] = True
                queue.append((y, x))
    while queue:
        cy, cx = queue.popleft()
        for dy, dx in FOUR:
            ny, nx = cy + dy, cx + dx
            if 0 <= ny < height and 0 <= nx < width and not mask[ny, nx] and not reached[ny, nx]:
                reached[ny, nx] = True
                queue.append((ny, nx))
    return ~reached


def _disc_offsets(radius):
    return [(dy, dx) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)
            if dy * dy + dx * dx <= radius * radius]


def _shifted(mask, dy, dx):
    # out[y, x] = mask[y + dy, x + dx], False outside
    height, width = mask.shape
    out = np.zeros_like(mask)
    y0, y1 = max(0, -dy), min(height, height - dy)
    x0, x1 = max(0, -dx), min(width, width - dx)
    if y0 < y1 and x0 < x1:
        out[y0:y1, x0:x1] = mask[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    return out


def erode(mask, radius):
    mask = np.asarray(mask, dtype=bool)
    out = mask.copy()
    for dy, dx in _disc_offsets(radius):
        out &= _shifted(mask, dy, dx)
    return out


def dilate(mask, radius):
    mask = np.asarray(mask, dtype=bool)
    out = np.zeros_like(mask)
    for dy, dx in _disc_offsets(radius):
        out |= _shifted(mask, dy, dx)
    return out


def opening(mask, radius):
    return dilate(erode(mask, radius), radius)


def band(mask, width):
    """Foreground pixels within `width` of a background pixel, the outside counting as background"""
    mask = np.asarray(mask, dtype=bool)
    return mask & ~erode(mask, width)


def iou(pred, gt):
    pred, gt = np.asarray(pred, dtype=bool), np.asarray(gt, dtype=bool)
    union = int(np.sum(pred | gt))
    return 1.0 if union == 0 else int(np.sum(pred & gt)) / union


def recall(pred, gt):
    pred, gt = np.asarray(pred, dtype=bool), np.asarray(gt, dtype=bool)
    return int(np.sum(pred & gt)) / int(np.sum(gt))


def random_masks(rng, count=200, max_side=64):
    """Random blobby masks with at least one foreground pixel"""
    masks = []
    while len(masks) < count:
        height, width = (int(v) for v in rng.integers(4, max_side + 1, size=2))
        mask = rng.random((height, width)) < rng.uniform(0.3, 0.75)
        if mask.any():
            masks.append(mask)
    return masks


def ellipse_axes(mask):
    """Full axis lengths of the moment ellipse, each pixel a unit square"""
    ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
    cov = np.cov(np.vstack([xs, ys]).astype(np.float64), bias=True) + np.eye(2) / 12.0
    small, large = np.linalg.eigvalsh(cov)
    return 4.0 * np.sqrt(large), 4.0 * np.sqrt(small)
