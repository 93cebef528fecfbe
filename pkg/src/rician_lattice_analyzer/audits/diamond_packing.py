'''
Diamond packing: the packing radius of L1 balls is half the minimal L1 norm.

Among rotations of Z^n the minimal L1 norm is at most sqrt(n), with equality
exactly for Hadamard rotations. For a lattice of volume V the comparable bound
is sqrt(n) V^(1/n).
'''

import logging
import math

from rician_lattice_analyzer.core import Finding, register_lattice_audit
from rician_lattice_analyzer.lattice import min_l1_norm

logger = logging.getLogger(__name__)


@register_lattice_audit("DiamondPacking", "Minimal L1 norm against the rotated-Z^n bound sqrt(n)")
def find_diamond_packing(auditpackage):
    lattice = auditpackage.lattice
    logger.info("*" * 80)
    logger.info(f"Computing the minimal L1 norm of {lattice.name}")

    best = min_l1_norm(lattice)
    bound = math.sqrt(lattice.n) * lattice.volume ** (1.0 / lattice.n)
    attained = abs(best - bound) <= 1e-9 * max(bound, 1.0)
    text = f"min |t|_1 = {best:.12g} (rotation bound sqrt(n) Vol^(1/n) = {bound:.12g}, attained: {str(attained).lower()})"
    return [Finding(data=best, text=text, lattice_name=lattice.name, metric='min_l1_norm', value=best)], 1
