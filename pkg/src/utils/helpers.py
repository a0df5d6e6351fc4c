import json
import logging
import time
from datetime import datetime
from enum import Enum
from functools import wraps
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


def format_timestamp(timestamp):
    """
    Format a timestamp for display
    """
    if isinstance(timestamp, str):
        timestamp = datetime.fromisoformat(timestamp.replace('Z', '+00:00'))
    return timestamp.strftime('%Y-%m-%d %H:%M:%S')


def measure_execution_time(func):
    """
    Decorator to measure the execution time of a function

    Returns:
        tuple: (result, execution time in milliseconds)
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        execution_time = (time.perf_counter() - start_time) * 1000
        logger.debug("Function %s executed in %.2f ms", func.__name__, execution_time)
        return result, execution_time
    return wrapper


def serialize_to_json(obj):
    """
    Serialize an object to JSON, handling datetimes, paths, enums and numpy scalars
    """
    def json_serial(obj):
        if isinstance(obj, datetime):
            return obj.isoformat()
        if isinstance(obj, Path):
            return str(obj)
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        raise TypeError(f"Type {type(obj)} not serializable")

    return json.dumps(obj, default=json_serial, indent=2, sort_keys=True)


def deserialize_from_json(json_str):
    """
    Deserialize a JSON string
    """
    return json.loads(json_str)
