#ifndef ATTRALIGN_GRAD_CHECK_HPP
#define ATTRALIGN_GRAD_CHECK_HPP

// Central finite-difference checks of every analytic gradient in the
// library. Used by the `grad-check` command and the test suites.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace attralign {

struct GradCheckReport {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double max_error = 0.0;  // largest scaled error seen
  double tolerance = 0.0;
  double seconds = 0.0;

  bool ok() const { return failures == 0; }
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double scaled_error(double analytic, double numeric, double floor);

// align_loss_grad against central differences with step 1e-5 on
// `samples` similarities in (-1, 1) for each of `param_sets` random
// hyperparameter sets, both as positive and as negative entries.
GradCheckReport check_alignment_gradient(std::size_t param_sets = 10, std::size_t samples = 1000,
                                         std::uint64_t seed = 1);
GradCheckReport check_id_gradient(std::size_t trials = 50, std::uint64_t seed = 2);
GradCheckReport check_seg_gradient(std::size_t trials = 20, std::uint64_t seed = 3);
// Gradient of the joint batch loss with respect to every model parameter on a
// 4-record batch with d = 8, holding the mined pair plan fixed. `variant`
// 0 is affine encoders, 1 adds a hidden layer, embedding normalisation and
// the textual identity loss.
GradCheckReport check_model_gradient(int variant = 0, std::uint64_t seed = 4);

std::vector<GradCheckReport> run_grad_checks();

}  // namespace attralign

#endif  // ATTRALIGN_GRAD_CHECK_HPP
