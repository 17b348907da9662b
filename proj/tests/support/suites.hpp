#pragma once

#include <cstdint>
#include <string>

namespace testing {

/// Each check returns an empty string on success, otherwise a description of
/// the first mismatch.

/// Random corpus (<= 20 tables, <= 8 headers, <= 5 mentions) through the
/// library retriever vs the brute-force scoring oracle.
std::string check_retrieval_oracle(std::uint64_t seed);

/// Random join graph (<= 8 nodes) through enumeration + group ranking vs
/// brute force over all connected subsets; also superset monotonicity and
/// connectivity of every returned group.
std::string check_join_oracle(std::uint64_t seed);

/// Random score vector: selection matches the oracle and is unchanged by a
/// random positive affine transform.
std::string check_threshold(std::uint64_t seed);

/// idf_col over a random corpus and idf_val over random counts vs ln(N/count).
std::string check_idf(std::uint64_t seed);

/// Random retrieved/truth fixtures (<= 10 questions, <= 10 tables) through
/// macro_prf, hit_at_k_group and cell_prf vs the reference metrics.
std::string check_metrics(std::uint64_t seed);

/// Ten tables with three screened-column signatures through answer_question
/// with a mock model. Returns the observed cluster-path SQL call count via
/// `calls`.
std::string check_cluster_economy(std::size_t& calls);

struct FixtureRun {
    double macro_f1 = 0.0;
    double seconds = 0.0;
    std::string error;
};

/// Offline pipeline over the shipped 12-table fixture at tau=0.6, k=5, eta=0.7.
FixtureRun run_fixture_pipeline();

} // namespace testing
