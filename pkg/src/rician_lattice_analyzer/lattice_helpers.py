import concurrent.futures
import functools
import logging
import os.path

import numpy as np

from rician_lattice_analyzer import rotations
from rician_lattice_analyzer.core import UsageError

logger = logging.getLogger(__name__)

# Substream families. A substream is fully determined by (seed, stream id, counter).
SIMULATION_STREAM = 1
PEP_STREAM = 2
NONWR_STREAM = 3
AUDIT_STREAM = 4


@functools.lru_cache(maxsize=None)
def _philox_key(seed, stream_id):
    seed_sequence = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=(int(stream_id),))
    return tuple(int(k) for k in seed_sequence.generate_state(2, dtype=np.uint64))


def substream(seed, stream_id, counter):
    """
    Counter-based generator for one trial (or one block of trials).
    The counter goes into the top word of Philox's 256-bit counter, so
    distinct counters never overlap and execution order cannot matter.
    """
    key = np.array(_philox_key(seed, stream_id), dtype=np.uint64)
    philox_counter = np.array([0, 0, 0, int(counter)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=philox_counter, key=key))


def split_blocks(total, block_size):
    """[(block index, start, count), ...] covering range(total)"""
    return [(i, start, min(block_size, total - start)) for i, start in enumerate(range(0, total, block_size))]


def run_blocks(function, blocks, threads=1):
    """
    Applies function to every block and returns the results in block order,
    so any reduction over them is independent of the number of threads.
    """
    if threads <= 1 or len(blocks) <= 1:
        return [function(block) for block in blocks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(function, blocks))


def load_lattice(spec, dim=None, unit_volume=False):
    """
    Resolves a lattice spec: a builtin name (identity, hadamard, bcc)
    or the path of a generator matrix file.
    """
    if spec in rotations.BUILTIN_NAMES:
        return rotations.builtin_lattice(spec, dim, unit_volume=unit_volume)
    if not os.path.isfile(spec):
        raise UsageError(f"'{spec}' is neither a builtin lattice {rotations.BUILTIN_NAMES} nor an existing file")
    logger.debug(f"Loading generator matrix from {spec}")
    lattice = rotations.load_generator(spec)
    if dim is not None and lattice.n != dim:
        raise UsageError(f"{spec} is {lattice.n}-dimensional but --dim {dim} was given")
    if unit_volume:
        return lattice.scaled_to_unit_volume()
    return lattice


def load_rotation_lattice(spec, dim):
    """Like load_lattice, but files must hold an orthogonal matrix"""
    if spec in rotations.BUILTIN_NAMES:
        return rotations.builtin_lattice(spec, dim)
    rotation = rotations.load_rotation(spec)
    if rotation.n != dim:
        raise UsageError(f"{spec} is {rotation.n}-dimensional but --dim {dim} was given")
    return rotation.lattice()


def hadamard_of(spec, lattice):
    """The Hadamard matrix behind a lattice, if it is a Hadamard rotation"""
    if spec == 'hadamard':
        return rotations.sylvester_order(lattice.n)
    try:
        rotation = rotations.RotationMatrix(lattice.generator)
    except UsageError:
        return None
    return rotations.as_hadamard(rotation)
