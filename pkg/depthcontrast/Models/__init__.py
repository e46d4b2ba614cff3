from .Configs import *
from .Params import *
from .Networks import *
from .Checkpoint import *
from .Models import *
