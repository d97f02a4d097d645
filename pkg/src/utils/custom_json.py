import json
import math
import re

import numpy as np


def loads(content, **args):
    contents = ''
    for line in content.split('\n'):
        if not re.match(r'\s*//.*', line):
            contents += line + "\n"
    return json.loads(contents, **args)


def _to_serializable(value):
    if isinstance(value, dict):
        return {str(k): _to_serializable(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [_to_serializable(v) for v in value]

    if isinstance(value, np.ndarray):
        return [_to_serializable(v) for v in value.tolist()]

    if isinstance(value, (np.bool_, bool)):
        return bool(value)

    if isinstance(value, np.integer):
        return int(value)

    if isinstance(value, (np.floating, float)):
        value = float(value)
        # JSON has no literal for non-finite floats
        if math.isnan(value) or math.isinf(value):
            return repr(value)
        return value

    return value


def dumps(value, **args):
    """Serializes reports with sorted keys; floats keep repr precision, numpy values are unwrapped"""
    return json.dumps(_to_serializable(value), sort_keys=True, indent=2, **args)
