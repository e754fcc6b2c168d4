#pragma once

#include "knnad/evaluation.hpp"

#include <string>

namespace knnad {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// Key-value report, one `key=value` per line, keys in this order:
//   protocol=<name>
//   param_<name>=<value>          (sorted by name)
//   class_<id>_auc=<auc>          (class protocols, ascending id)
//   <axis>_<value>_auc=<auc>      (sweeps, ascending value)
//   mean_auc=<auc>
std::string to_key_value(const EvalReport& report);

/// Same content as a JSON object: {"protocol", "params", "per_class_auc",
/// "sweep_axis", "sweep": [{"value", "auc"}], "mean_auc"}.
std::string to_json(const EvalReport& report);

}  // namespace knnad
