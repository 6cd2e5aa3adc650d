"""pyvcr"""


from .image import Image, load_image, save_image, to_luminance  # noqa
from .iqa import VifConfig, vif, delta_v  # noqa
from .corruptions import CorruptionSpec, ParamVector  # noqa
from .testset import SampleRecord, Manifest  # noqa
from .curves import PerformanceHistogram, PerformanceCurve  # noqa
from .metrics import VcrReport, ComparisonReport  # noqa

try:
    from .version import version

    __version__ = version
except ImportError:
    __version__ = "0.0.0"
