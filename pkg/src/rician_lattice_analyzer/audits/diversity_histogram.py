import collections
import logging

from rician_lattice_analyzer.core import Finding, register_lattice_audit
from rician_lattice_analyzer.lattice import minimal_vectors

logger = logging.getLogger(__name__)


@register_lattice_audit("DiversityHistogram", "Number of nonzero components of each minimal vector")
def find_diversity_histogram(auditpackage):
    lattice = auditpackage.lattice
    logger.info("*" * 80)
    logger.info(f"Counting the diversity of {lattice.name}'s minimal vectors")

    report = minimal_vectors(lattice)
    histogram = collections.Counter(v.diversity for v in report.minimal_vectors)
    histogram = dict(sorted(histogram.items()))
    listing = ', '.join(f"{k}: {count}" for k, count in histogram.items())
    text = f"diversity histogram of minimal vectors {{{listing}}}"
    return [Finding(data=histogram, text=text, lattice_name=lattice.name, metric='diversity_histogram',
                    value=histogram)], len(report.minimal_vectors)
