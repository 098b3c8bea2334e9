from .spectral import *
from .design import *
from .selfsimilar import *
