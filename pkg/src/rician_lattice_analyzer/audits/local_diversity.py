'''
Local diversity of Hadamard rotations: every nonzero t of U Z^n with
diversity k satisfies k |t|^2 >= n. Only run for Hadamard rotations.
'''

import logging

from rician_lattice_analyzer.analysis import local_diversity_audit
from rician_lattice_analyzer.core import Finding, ViolationFound, register_lattice_audit

logger = logging.getLogger(__name__)


@register_lattice_audit("LocalDiversity", "Minimum of diversity(t) * |t|^2 over short vectors (Hadamard rotations)")
def find_local_diversity(auditpackage):
    lattice = auditpackage.lattice
    if auditpackage.hadamard is None:
        logger.info(f"{lattice.name} is not a Hadamard rotation, skipping the local diversity check")
        return [], 0

    logger.info("*" * 80)
    logger.info(f"Checking local diversity of {lattice.name} up to |t|^2 <= {auditpackage.radius}")
    try:
        report = local_diversity_audit(lattice, auditpackage.radius)
    except ViolationFound as violation:
        text = f"local diversity VIOLATED: k|t|^2 = {violation.product:.12g} < {violation.threshold} at t = {list(violation.witness)}"
        return [Finding(data=violation, text=text, lattice_name=lattice.name, metric='local_diversity_min',
                        value=violation.product)], 1
    text = (f"local diversity min k|t|^2 = {report.min_product:.12g} over {report.vectors_checked} vectors "
            f"(witness coords {list(report.witness_coords)})")
    return [Finding(data=report, text=text, lattice_name=lattice.name, metric='local_diversity_min',
                    value=report.min_product)], report.vectors_checked
