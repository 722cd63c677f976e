#!/usr/bin/env python3

import json
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from utils import write_json
from workflow.errors import ValidationError
from workflow.model.network import ModelParams

logger = logging.getLogger('gaitlab.model.checkpoint')

CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(path: Union[str, Path], params: ModelParams, metadata: Optional[dict] = None):
    """JSON container of named tensors: shape plus flattened row-major values"""
    document = {
        'format_version': CHECKPOINT_FORMAT_VERSION,
        'input_dim': params.input_dim,
        'hidden_size': params.hidden_size,
        'metadata': metadata or {},
        'tensors': {
            name: {'shape': list(array.shape), 'values': [float(v) for v in array.ravel()]}
            for name, array in params.to_arrays().items()
        },
    }
    write_json(path, document)
    logger.debug(f"Saved checkpoint to {path}")


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelParams, dict]:
    with open(path, encoding='utf-8') as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid checkpoint JSON: {e}")
    version = document.get('format_version')
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported checkpoint format version {version}")
    try:
        arrays = {
            name: np.asarray(entry['values'], dtype=np.float64).reshape(entry['shape'])
            for name, entry in document['tensors'].items()
        }
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"{path}: malformed checkpoint: {e}")
    return ModelParams.from_arrays(arrays), document.get('metadata', {})
