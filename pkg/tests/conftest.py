import hypothesis
import numpy as np

np.seterr(all="warn")

hypothesis.settings.register_profile(
    "default", max_examples=40, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")
