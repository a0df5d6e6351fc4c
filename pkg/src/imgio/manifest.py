import logging
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from ..core.errors import DuplicateImageId, MissingColumn, MissingFile, PallorError
from ..core.schemas import Laterality, ManifestEntry

logger = logging.getLogger(__name__)

MASK_COLUMNS = ("disc_mask_path", "vessel_mask_path", "fovea_mask_path")

_LATERALITY_ALIASES = {
    "od": Laterality.OD,
    "right": Laterality.OD,
    "r": Laterality.OD,
    "os": Laterality.OS,
    "left": Laterality.OS,
    "l": Laterality.OS,
}


def parse_point(text):
    """
    Parse "x,y" into a float pair; blank text gives None
    """
    text = (text or "").strip().strip("()")
    if not text:
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise PallorError(f"Cannot parse point '{text}', expected 'x,y'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise PallorError(f"Cannot parse point '{text}': {e}") from e


def parse_laterality(text):
    text = (text or "").strip().lower()
    if not text:
        return None
    if text == "unknown":
        return Laterality.UNKNOWN
    if text not in _LATERALITY_ALIASES:
        raise PallorError(f"Unknown laterality '{text}'")
    return _LATERALITY_ALIASES[text]


def _resolve(base_dir, value):
    value = (value or "").strip()
    if not value:
        return None
    path = Path(value)
    if not path.is_absolute():
        path = base_dir / path
    return str(path)


def read_manifest(path):
    """
    Read a batch manifest

    Args:
        path (str): CSV file with a header row; image_path is required, unknown columns are ignored

    Returns:
        list: ManifestEntry objects in file order
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    frame.columns = [c.strip() for c in frame.columns]
    if "image_path" not in frame.columns:
        raise MissingColumn("image_path")

    base_dir = path.parent
    entries = []
    seen = set()
    for row in frame.to_dict(orient="records"):
        image_path = _resolve(base_dir, row.get("image_path"))
        if image_path is None:
            raise PallorError(f"Manifest {path} has a row with an empty image_path")

        image_id = (row.get("image_id") or "").strip() or Path(image_path).stem
        if image_id in seen:
            raise DuplicateImageId(image_id)
        seen.add(image_id)

        masks = {column: _resolve(base_dir, row.get(column)) for column in MASK_COLUMNS}
        for column, mask_path in masks.items():
            if mask_path is not None and not Path(mask_path).is_file():
                raise MissingFile(f"{column} for image '{image_id}' does not exist: {mask_path}")

        try:
            entries.append(ManifestEntry(
                image_path=image_path,
                image_id=image_id,
                subject_id=(row.get("subject_id") or "").strip(),
                fovea_point=parse_point(row.get("fovea_point")),
                expected_laterality=parse_laterality(row.get("expected_laterality")),
                dataset=(row.get("dataset") or "").strip(),
                **masks,
            ))
        except ValidationError as e:
            raise PallorError(f"Invalid manifest row for '{image_id}': {e}") from e

    logger.info("Read %d manifest entries from %s", len(entries), path)
    return entries
