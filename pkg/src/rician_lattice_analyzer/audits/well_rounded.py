import logging

from rician_lattice_analyzer.core import Finding, register_lattice_audit
from rician_lattice_analyzer.lattice import is_well_rounded, minimal_vectors

logger = logging.getLogger(__name__)


@register_lattice_audit("WellRounded", "Do the minimal vectors span R^n?")
def find_well_rounded(auditpackage):
    lattice = auditpackage.lattice
    logger.info("*" * 80)
    logger.info(f"Checking whether {lattice.name} is well-rounded")

    well_rounded = is_well_rounded(lattice)
    text = f"WR = {str(well_rounded).lower()}"
    if not well_rounded:
        text += f" (minimal vectors span fewer than {lattice.n} dimensions)"
    report = minimal_vectors(lattice)
    return [Finding(data=report, text=text, lattice_name=lattice.name, metric='well_rounded', value=well_rounded)], 1
