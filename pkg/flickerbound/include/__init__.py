import os

PACKAGE_PATH = os.path.dirname(__file__)
SAMPLES_PATH = os.path.join(PACKAGE_PATH, "samples")
