from .typeg import *
from .moments import *
from .fidi import *
from .monotone import *
