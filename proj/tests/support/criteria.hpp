#pragma once

// Checks behind the acceptance report; also exercised from ctest.

#include <string>

namespace criteria {

struct Outcome
{
   enum class Status { pass, fail, skip } status = Status::fail;
   std::string detail;
   double seconds = 0.0;
   double budget_seconds = 0.0;
};

Outcome metric_oracle();
Outcome mfcc_fidelity();
Outcome mitigator_optimality();
Outcome synthetic_end_to_end();
Outcome statistics();
/// Runs `cli experiment` twice into scratch directories and compares report.json bytes.
Outcome determinism(const std::string& cli, const std::string& scratch);
/// Skipped unless `corpus_root` is non-empty.
Outcome real_corpus(const std::string& corpus_root);

} // namespace criteria
