#pragma once

#include "lfs/sae.hpp"

// batched hot loops. ref:: is the plain serial version kept as the test oracle,
// par:: is the OpenMP one used by the pipeline.
namespace lfs::kern {

// x: B rows of d. writes B*k support indices and raw values
namespace ref {
void encode_batch(const sae_params& p, const double* x, int B, int* idx, double* val);
double recon_grad(const sae_params& p, const double* x, int B, const int* idx, const double* val,
                  sae_grads& g);
void feature_diff(const double* zu, const double* zv, int n, int F, bool signed_mode, double* g);
}  // namespace ref

namespace par {
void encode_batch(const sae_params& p, const double* x, int B, int* idx, double* val);
// deterministic: fixed chunking and chunk-order reduction, independent of thread count
double recon_grad(const sae_params& p, const double* x, int B, const int* idx, const double* val,
                  sae_grads& g, bool deterministic = true);
void feature_diff(const double* zu, const double* zv, int n, int F, bool signed_mode, double* g);
}  // namespace par

}  // namespace lfs::kern
