# Tests package for invariant-steer
