from .Tensor import *
from .Tape import *
from .Primitives import *
from .GradCheck import *
