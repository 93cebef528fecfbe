import logging

from rician_lattice_analyzer.analysis import fade_variance_ratio
from rician_lattice_analyzer.core import Finding, register_lattice_audit
from rician_lattice_analyzer.lattice import minimal_vectors

logger = logging.getLogger(__name__)


@register_lattice_audit("FadeVariance", "Largest normalized fade variance of a minimal vector at the audit K")
def find_fade_variance(auditpackage):
    lattice = auditpackage.lattice
    K = float(auditpackage.settings.get('audit K', '20'))
    logger.info("*" * 80)
    logger.info(f"Computing fade variance ratios of {lattice.name}'s minimal vectors at K={K}")

    report = minimal_vectors(lattice)
    ratios = [fade_variance_ratio(v.point, K) for v in report.minimal_vectors]
    worst = max(ratios)
    text = f"fade variance ratio at K={K:g}: max {worst:.12g} over {len(ratios)} minimal vectors"
    return [Finding(data=ratios, text=text, lattice_name=lattice.name, metric='fade_variance_max',
                    value=worst)], len(ratios)
