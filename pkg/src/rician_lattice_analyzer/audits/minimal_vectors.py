import logging
import math

from rician_lattice_analyzer.core import Finding, register_lattice_audit
from rician_lattice_analyzer.lattice import minimal_vectors

logger = logging.getLogger(__name__)


@register_lattice_audit("MinimalVectors", "Minimal squared norm and number of minimal vectors (up to sign)")
def find_minimal_vectors(auditpackage):
    lattice = auditpackage.lattice
    logger.info("*" * 80)
    logger.info(f"Enumerating minimal vectors of {lattice.name}")

    report = minimal_vectors(lattice)
    findings = [
        Finding(data=report, text=f"min |t|^2 = {report.min_norm_sq:.12g} (min |t|_2 = {math.sqrt(report.min_norm_sq):.12g})",
                lattice_name=lattice.name, metric='min_norm_sq', value=report.min_norm_sq),
        Finding(data=report, text=f"{len(report.minimal_vectors)} minimal vectors up to sign",
                lattice_name=lattice.name, metric='minimal_vector_count', value=len(report.minimal_vectors)),
    ]
    for vector in report.minimal_vectors:
        logger.debug(f"minimal vector coords={vector.coords} point={vector.point.tolist()}")
    return findings, len(report.minimal_vectors)
