from . import minimal_vectors
from . import well_rounded
from . import diamond_packing
from . import diversity_histogram
from . import local_diversity
from . import fade_variance
