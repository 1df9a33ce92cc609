from hypothesis import settings

# numba compilation on first kernel use makes wall-clock deadlines meaningless
settings.register_profile("suite", deadline=None)
settings.load_profile("suite")
