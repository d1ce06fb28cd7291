"""Distance-function kernel toolkit: PDE kernel catalog, kernel series
fitting and transforms, boundary-only harmonic parts, multiple-reciprocity
ladders, fractional Laplacians and kernel sigmoids."""

from .geometry import AnisotropyMatrix, Point
from .kernels import Family, KernelSpec, Kind
from .pointcloud import PointCloud
from .series import SeriesModel, fit

__all__ = ["AnisotropyMatrix", "Family", "KernelSpec", "Kind", "Point", "PointCloud", "SeriesModel", "fit"]
__version__ = "0.1.0"
