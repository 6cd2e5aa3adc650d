"""Constants used for pyvcr modules:

 * ``NUM_BINS``: Default visual change resolution, the number of
   equal-width bins the Δv range [0, 1] is divided into, both when
   estimating performance curves and when computing coverage.

 * ``MIN_PER_BIN``: Default minimum number of observations in a bin
   before the bin is trusted, for performance estimates and for
   counting a bin as covered.

 * ``CI_LEVEL``: Default level of the pointwise confidence bands used
   when comparing performance curves for similarity.

 * ``NUM_ENTRY_CLASSES``: Number of entry-level classes that fine labels
   are mapped onto. Chance level for a right anchor is 1 / this.

 * ``SIMILARITY_THRESHOLD``: A pair of corruptions is similar when the
   binomial p-value of the distinguishing experiment is at least this.

 * ``EPSILON``: Slack for floating point comparisons of curve values
   and areas.

 * ``VIF_SCALES``, ``VIF_NOISE_VAR``, ``VIF_EPS``: Defaults for the
   pixel-domain Visual Information Fidelity, number of scales, the
   variance of the additive noise modelling the human visual system,
   and the stabilizer for variance ratios.
"""
NUM_BINS = 40

MIN_PER_BIN = 20

CI_LEVEL = 0.83

NUM_ENTRY_CLASSES = 16

SIMILARITY_THRESHOLD = 0.95

EPSILON = 1e-12

VIF_SCALES = 4

VIF_NOISE_VAR = 2.0

VIF_EPS = 1e-10
