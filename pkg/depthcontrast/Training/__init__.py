from .Adam import *
from .RunRecord import *
from .Loops import *
from .Protocols import *
from .Trainer import *
