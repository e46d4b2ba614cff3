from .DepthContrast import DepthContrast
from .Exceptions import *
