"""Parameter, preset and result models for hybridqed."""
