from .Planes import *
from .Manifest import *
from .Synthetic import *
from .Folds import *
from .Dataset import *
from .Datasets import *
