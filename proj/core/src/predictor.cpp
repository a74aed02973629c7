#include "dsacd/diffusion/predictor.hpp"

#include <stdexcept>
#include <string>

namespace dsacd::diffusion {

void check_inputs(const NoisePredictor& predictor, const Matrix& z, const Matrix& cond,
                  std::span<const int> steps) {
  if (z.rows() != predictor.sample_dim())
    throw std::invalid_argument("sample dimension " + std::to_string(z.rows()) +
                                " does not match predictor output dimension " +
                                std::to_string(predictor.sample_dim()));
  if (cond.rows() != predictor.cond_dim())
    throw std::invalid_argument("conditioning dimension " + std::to_string(cond.rows()) +
                                " does not match predictor conditioning dimension " +
                                std::to_string(predictor.cond_dim()));
  if (cond.cols() != z.cols() || static_cast<Index>(steps.size()) != z.cols())
    throw std::invalid_argument("batch sizes of sample, conditioning and steps disagree");
}

}  // namespace dsacd::diffusion
