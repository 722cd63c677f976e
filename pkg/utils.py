import json
import hashlib
import logging
from pathlib import Path
from typing import Any, Union

logger = logging.getLogger('gaitlab.utils')


def execute_step(step, *args):
    try:
        return step(*args)
    except Exception as e:
        logger.error(f'Error executing step {step.__name__}: {e}')
        raise e

#
# Seed derivation
#

def derive_seed(master_seed: int, stage: str, *indices: int) -> int:
    """
    Mix a master seed, a stage name and integer indices into a child seed.

    The mixing function is BLAKE2b over the text "stage|master|i0|i1|...",
    truncated to 63 bits. Changing any input changes the seed; the result does
    not depend on process, platform or call order, so every stage can be
    reproduced on its own.
    """
    text = "|".join([stage, str(int(master_seed))] + [str(int(i)) for i in indices])
    digest = hashlib.blake2b(text.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'big') & ((1 << 63) - 1)

#
# File helpers
#

def file_sha256(path: Union[str, Path]) -> str:
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            sha.update(chunk)
    return sha.hexdigest()


def write_json(path: Union[str, Path], document: Any, indent: Union[int, None] = None):
    """Write JSON with sorted keys so identical documents give identical bytes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    separators = (',', ':') if indent is None else (',', ': ')
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(document, f, indent=indent, sort_keys=True, separators=separators, allow_nan=False)
        f.write('\n')
    logger.debug(f'Wrote JSON file: {path}')


def write_text(path: Union[str, Path], content: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(content)
    logger.debug(f'Wrote file: {path}')


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for positive input"""
    return int(value + 0.5) if value >= 0 else -int(-value + 0.5)
