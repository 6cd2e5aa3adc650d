"""Example code for benchmarking the visual change computation"""
import timeit

from pyvcr.image import Image, to_luminance, to_storage
from pyvcr.iqa import delta_v
from pyvcr.corruptions import apply_corruption, get_spec
from pyvcr.utils.testing import texture


def benchme(size=224, doprint=False):
    """Corrupt one texture and compute its visual change

    Pipe the following code snip into "ipython" on the shell:
    > echo "import benchme
      %timeit benchme.benchme()
      %timeit benchme.benchme(size=512)
      " | ipython

    or run this module directly
    """
    original = Image(to_storage(texture(size, seed=0)))
    corrupted = apply_corruption(
        get_spec("gaussian_blur"), [2.0], original, rng_seed=0
    )
    value = delta_v(to_luminance(original), to_luminance(corrupted))
    if doprint:
        print(value)


if __name__ == "__main__":
    for side in [64, 224, 512]:
        print("Side length {}:".format(side))
        print(
            timeit.timeit(
                stmt="benchme(size={})".format(side),
                setup="from benchme import benchme",
                number=20,
            )
        )
