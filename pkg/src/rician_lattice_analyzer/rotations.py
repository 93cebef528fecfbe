"""
Rotation matrices and builtin code lattices.

Hadamard matrices come from Sylvester's construction, W_{2^(k+1)} = W_2 (x) W_{2^k},
and are scaled to the Hadamard rotation U = W / sqrt(n). Other rotations (for
example algebraic rotations from published tables) are data: they are read from
plain-text files, see data/rotations/README.md for the format.
"""

import dataclasses
import logging
import math
import os

import numpy as np
from scipy.stats import ortho_group

from rician_lattice_analyzer.core import (EPS_ORTH, MAX_HADAMARD_ORDER, NotOrthogonal, OrderTooLarge, ParseError,
                                          UnknownName, UnsupportedDimension, UsageError)
from rician_lattice_analyzer.lattice import Lattice

logger = logging.getLogger(__name__)

W2 = np.array([[1, 1], [1, -1]], dtype=np.int64)

BCC_GENERATORS = ([1, 1, 1], [1, -1, -1], [-1, -1, 1])

BUILTIN_NAMES = ('identity', 'hadamard', 'bcc')


@dataclasses.dataclass(frozen=True, eq=False)
class HadamardMatrix:
    """A +-1 matrix with W^T W = n I"""
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.int64)
        if not is_hadamard(entries):
            raise UsageError(f"Not a Hadamard matrix:\n{entries}")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def n(self):
        return self.entries.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class RotationMatrix:
    """An n x n real matrix with |R^T R - I|_max <= 1e-9; reflections are accepted"""
    entries: np.ndarray
    name: str = 'rotation'

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParseError(f"Rotation must be square, got shape {entries.shape}")
        deviation = orthogonality_deviation(entries)
        if deviation > EPS_ORTH:
            raise NotOrthogonal(deviation)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def n(self):
        return self.entries.shape[0]

    def lattice(self):
        return Lattice(self.entries, name=self.name)


def orthogonality_deviation(matrix):
    m = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(m.T @ m - np.eye(m.shape[0]))))


def is_hadamard(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    if not np.all((m == 1) | (m == -1)):
        return False
    w = m.astype(np.int64)
    return bool(np.array_equal(w.T @ w, w.shape[0] * np.eye(w.shape[0], dtype=np.int64)))


def kronecker(a, b):
    order = a.n * b.n
    if order > MAX_HADAMARD_ORDER:
        raise OrderTooLarge(f"Hadamard order {order} exceeds {MAX_HADAMARD_ORDER}")
    return HadamardMatrix(np.kron(a.entries, b.entries))


def sylvester(k):
    if k < 0:
        raise OrderTooLarge(f"Sylvester index must be nonnegative, got {k}")
    if 2 ** k > MAX_HADAMARD_ORDER:
        raise OrderTooLarge(f"Hadamard order 2^{k} exceeds {MAX_HADAMARD_ORDER}")
    w = HadamardMatrix(np.ones((1, 1), dtype=np.int64))
    w2 = HadamardMatrix(W2)
    for _ in range(k):
        w = kronecker(w2, w)
    return w


def sylvester_order(order):
    """Hadamard matrix of a power-of-two order"""
    if order < 1 or order & (order - 1):
        raise UnsupportedDimension(f"Sylvester's construction needs a power of two, got {order}")
    return sylvester(order.bit_length() - 1)


def to_rotation(w):
    return RotationMatrix(w.entries / math.sqrt(w.n), name=f"hadamard-{w.n}")


def as_hadamard(rotation, tol=1e-9):
    """Recovers W if the rotation is a scaled Hadamard matrix, otherwise None"""
    scaled = np.asarray(rotation.entries, dtype=float) * math.sqrt(rotation.n)
    rounded = np.rint(scaled)
    if np.max(np.abs(scaled - rounded)) > tol * math.sqrt(rotation.n) or not is_hadamard(rounded):
        return None
    return HadamardMatrix(rounded.astype(np.int64))


def random_rotation(n, rng):
    """Haar-distributed orthogonal matrix"""
    if n == 1:
        return RotationMatrix(np.array([[rng.choice([-1.0, 1.0])]]), name='random-1')
    return RotationMatrix(ortho_group.rvs(dim=n, random_state=rng), name=f"random-{n}")


###############################################################################
# Matrix files
###############################################################################
def _read_matrix(path):
    if not os.path.isfile(path):
        raise ParseError(f"Matrix file '{path}' does not exist")
    with open(path, encoding='utf-8') as fh:
        lines = [line.strip() for line in fh]
    lines = [line for line in lines if line and not line.startswith('#')]
    if not lines:
        raise ParseError(f"Matrix file '{path}' is empty")
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"{path}: first line must be the dimension, got '{lines[0]}'")
    if n < 1:
        raise ParseError(f"{path}: dimension must be positive, got {n}")
    if len(lines) != n + 1:
        raise ParseError(f"{path}: expected {n} matrix rows, got {len(lines) - 1}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=1):
        fields = line.split()
        if len(fields) != n:
            raise ParseError(f"{path}: row {lineno} has {len(fields)} entries, expected {n}")
        try:
            rows.append([float(field) for field in fields])
        except ValueError:
            raise ParseError(f"{path}: row {lineno} contains a non-numeric entry: '{line}'")
    matrix = np.array(rows, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ParseError(f"{path}: matrix contains non-finite entries")
    return matrix


def load_rotation(path):
    matrix = _read_matrix(path)
    logger.debug(f"Loaded {matrix.shape[0]}x{matrix.shape[0]} rotation from {path}")
    return RotationMatrix(matrix, name=os.path.splitext(os.path.basename(path))[0])


def load_generator(path):
    """Loads a generator matrix in the rotation file format, without the orthogonality check"""
    matrix = _read_matrix(path)
    return Lattice(matrix, name=os.path.splitext(os.path.basename(path))[0])


def save_rotation(rotation, path, comment=None):
    entries = np.asarray(rotation.entries, dtype=float)
    tmp_path = f"{path}.tmp"
    try:
        with open(tmp_path, 'w', encoding='utf-8') as fh:
            if comment:
                for line in comment.splitlines():
                    fh.write(f"# {line}\n")
            fh.write(f"{entries.shape[0]}\n")
            for row in entries:
                fh.write(' '.join(f"{x:.12f}" for x in row) + '\n')
        os.replace(tmp_path, path)
    except OSError:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


###############################################################################
# Builtin lattices
###############################################################################
def bcc_lattice(unit_volume=False):
    """Body-centered cubic lattice; all of its minimal vectors are parallel to (+-1, +-1, +-1)"""
    lattice = Lattice.from_rows(BCC_GENERATORS, name='bcc')
    if unit_volume:
        return lattice.scaled_to_unit_volume()
    return lattice


def bcc_tensor_hadamard(k, unit_volume=False):
    """Tensor product of BCC with the Sylvester-Hadamard lattice of order 2^k"""
    w = sylvester(k)
    generator = np.kron(bcc_lattice().generator, w.entries.astype(float))
    lattice = Lattice(generator, name=f"bcc-x-hadamard-{w.n}")
    if unit_volume:
        return lattice.scaled_to_unit_volume()
    return lattice


def builtin_lattice(name, n=None, unit_volume=False):
    """
    identity and hadamard lattices have unit volume. bcc keeps its integer
    generators (volume 4) unless unit_volume is set.
    """
    if name not in BUILTIN_NAMES:
        raise UnknownName(f"Unknown lattice '{name}'! Must be one of {BUILTIN_NAMES} or a file path")
    if name == 'bcc':
        if n not in (None, 3):
            raise UnsupportedDimension(f"bcc is only defined for n = 3, got n = {n}")
        return bcc_lattice(unit_volume)
    if n is None or n < 1:
        raise UnsupportedDimension(f"'{name}' needs a positive dimension, got {n}")
    if name == 'identity':
        return Lattice(np.eye(n), name='identity')
    return to_rotation(sylvester_order(n)).lattice()
