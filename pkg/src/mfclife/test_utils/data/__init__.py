from .patterns import *
