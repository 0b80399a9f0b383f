#pragma once

namespace cii {

/// Thread count used by the batch kernels (transport query evaluation,
/// batch prediction, experiment cells). 1 selects the serial reference
/// path; 0 means "use all hardware threads".
void set_num_threads(int n);
int num_threads();

}  // namespace cii
