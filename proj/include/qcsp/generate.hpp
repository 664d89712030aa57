#ifndef QCSP_GENERATE_HPP
#define QCSP_GENERATE_HPP

#include "qcsp/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace qcsp {

enum class EnsureClass { Qbtp, Qmme };

struct GenParams {
    int n = 4;
    int d = 3;
    /// One letter per variable in prefix order, E or A.
    std::string pattern = "EAEE";
    /// Probability that a pair of variables carries a constraint.
    double density = 0.5;
    /// Probability that a tuple is allowed in an unstructured relation.
    double tuple_density = 0.5;
    /// Fraction of relations drawn from structured families (nested support
    /// chains, prefix sets, top-anchored sets) instead of uniform tuples.
    double structured = 0.0;
    /// When false, no constraint links two universals (such a constraint is
    /// either complete or makes the instance trivially empty).
    bool forall_pairs = true;
    std::uint64_t seed = 1;
    std::optional<EnsureClass> ensure;
    /// Resampling budget per variable when `ensure` is set.
    int max_attempts = 20000;
};

class GenerationError : public std::runtime_error {
public:
    GenerationError(const std::string& what, long attempts) : std::runtime_error(what), attempts_(attempts) {}
    long attempts() const { return attempts_; }

private:
    long attempts_;
};

/// Deterministic for fixed params. With `ensure`, the relations into each
/// new variable are resampled until every triple ending there has the
/// requested property under the prefix.
Instance generate_instance(const GenParams& params);

/// Uniform random pattern of length n (all letters equally likely).
std::string random_pattern(int n, std::uint64_t seed);

}  // namespace qcsp

#endif  // QCSP_GENERATE_HPP
