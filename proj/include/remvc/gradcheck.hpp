#pragma once

// Finite-difference verification of every hand-derived loss gradient on
// small seeded toy problems.

#include <cstdint>
#include <string>
#include <vector>

#include "remvc/core_types.hpp"
#include "remvc/model.hpp"

namespace remvc {

enum class CheckedLoss { poi, mob, inter, mse, joint, inter_sim };

const char* loss_name(CheckedLoss loss);

struct GradcheckResult {
  std::string loss;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;  // into the flattened parameter vector
  std::string worst_tensor;
  std::size_t parameters = 0;
};

/// Toy problem: L regions, F categories, H slices, random counts and trips.
Dataset toy_dataset(std::uint64_t seed, std::size_t regions = 4, std::size_t categories = 3,
                    std::size_t hours = 2);

ModelConfig toy_model_config();

/// Max relative error (denominators clamped at 1e-8) between the analytic
/// gradient and central differences with step h over every parameter the
/// loss touches. `corrupt` perturbs one analytic component, as a negative
/// control.
GradcheckResult gradcheck(CheckedLoss loss, std::uint64_t seed, double h = 1e-5, bool corrupt = false);

/// The four reported losses (poi, mob, inter, mse) over `configs` seeds
/// each, keeping the worst case per loss.
std::vector<GradcheckResult> gradcheck_suite(std::uint64_t seed, std::size_t configs = 5, bool corrupt = false);

/// Flatten / restore every tensor of a parameter set.
std::vector<double> flatten(const ReMvcParams& params);
void unflatten(std::span<const double> flat, ReMvcParams& params);

}  // namespace remvc
