#pragma once

namespace certipose {

/// Caps the worker count of the parallel kernels; n <= 0 restores the default.
void set_max_threads(int n);
int max_threads();

}  // namespace certipose
