#include "knnad/report.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <sstream>

namespace knnad {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), end};
}

std::string to_key_value(const EvalReport& report) {
    std::ostringstream out;
    out << "protocol=" << to_string(report.protocol) << '\n';
    for (const auto& [key, value] : report.params) {
        out << "param_" << key << '=' << value << '\n';
    }
    for (const auto& [cls, auc] : report.per_class_auc) {
        out << "class_" << cls << "_auc=" << format_double(auc) << '\n';
    }
    for (const auto& p : report.sweep) {
        out << report.sweep_axis << '_' << format_double(p.value) << "_auc=" << format_double(p.auc) << '\n';
    }
    out << "mean_auc=" << format_double(report.mean_auc) << '\n';
    return out.str();
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["protocol"] = to_string(report.protocol);
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.params) {
        j["params"][key] = value;
    }
    j["per_class_auc"] = nlohmann::ordered_json::object();
    for (const auto& [cls, auc] : report.per_class_auc) {
        j["per_class_auc"][std::to_string(cls)] = auc;
    }
    j["sweep_axis"] = report.sweep_axis;
    j["sweep"] = nlohmann::ordered_json::array();
    for (const auto& p : report.sweep) {
        j["sweep"].push_back({{"value", p.value}, {"auc", p.auc}});
    }
    j["mean_auc"] = report.mean_auc;
    return j.dump(2) + "\n";
}

}  // namespace knnad
