from .mixing import *
from .basis import *
from .integrability import *
