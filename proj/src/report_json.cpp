#include "report_json.hpp"

#include <cmath>
#include <cstdio>

namespace qsim::app {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void JsonWriter::comma_and_indent() {
  if (pending_key_) {
    pending_key_ = false;
    return;  // value follows "key": directly
  }
  if (!has_items_.empty()) {
    if (has_items_.back()) buf_ += ',';
    has_items_.back() = true;
    buf_ += '\n';
    buf_.append(2 * has_items_.size(), ' ');
  }
}

JsonWriter& JsonWriter::begin_object() {
  comma_and_indent();
  buf_ += '{';
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const bool had = has_items_.back();
  has_items_.pop_back();
  if (had) {
    buf_ += '\n';
    buf_.append(2 * has_items_.size(), ' ');
  }
  buf_ += '}';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  comma_and_indent();
  buf_ += '[';
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const bool had = has_items_.back();
  has_items_.pop_back();
  if (had) {
    buf_ += '\n';
    buf_.append(2 * has_items_.size(), ' ');
  }
  buf_ += ']';
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  comma_and_indent();
  buf_ += '"';
  buf_ += escape_json(k);
  buf_ += "\": ";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  comma_and_indent();
  buf_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  comma_and_indent();
  buf_ += '"';
  buf_ += escape_json(v);
  buf_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(bool v) {
  comma_and_indent();
  buf_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value_null() {
  comma_and_indent();
  buf_ += "null";
  return *this;
}

void write_conventions(JsonWriter& w) {
  w.key("qubit_order")
      .value("qubit 0 is the leftmost ket symbol (most significant bit)");
  w.key("bell_convention")
      .value("phi+- = (|00> +- |11>)/sqrt(2), psi+- = (|01> +- |10>)/sqrt(2)");
}

namespace {

void write_state_amps(JsonWriter& w, const StateVector<double>& s) {
  w.begin_array();
  for (Index i = 0; i < s.dim(); ++i) {
    w.begin_array();
    w.value(s.amp(i).real());
    w.value(s.amp(i).imag());
    w.end_array();
  }
  w.end_array();
}

void write_discrepancies(JsonWriter& w, const std::vector<Discrepancy>& list) {
  w.key("discrepancies").begin_array();
  for (const auto& d : list) {
    w.begin_object();
    w.key("claim").value(d.claim);
    w.key("detail").value(d.detail);
    w.key("observed");
    if (d.observed.has_value())
      w.value(*d.observed);
    else
      w.value_null();
    w.end_object();
  }
  w.end_array();
}

}  // namespace

std::string report_to_json(const ProtocolReport<double>& report,
                           const std::string& command,
                           const PairingReport<double>* search) {
  JsonWriter w;
  w.begin_object();
  w.key("command").value(command);
  w.key("mode").value(to_string(report.mode));

  w.key("parameters").begin_object();
  for (const auto& [k, v] : report.parameters) w.key(k).value(v);
  for (const auto& [k, v] : report.labels) w.key(k).value(v);
  write_conventions(w);
  w.end_object();

  w.key("metrics").begin_object();
  for (const auto& [k, v] : report.metrics) w.key(k).value(v);
  w.end_object();

  w.key("branches").begin_array();
  for (const auto& b : report.branches) {
    w.begin_object();
    w.key("path").begin_array();
    for (const auto& step : b.path) w.value(step);
    w.end_array();
    w.key("joint_prob").value(b.joint_prob);
    w.key("cond_prob").value(b.cond_prob);
    w.key("state");
    if (b.state.has_value())
      write_state_amps(w, *b.state);
    else
      w.value_null();
    w.end_object();
  }
  w.end_array();

  if (report.intermediate.has_value()) {
    w.key("intermediate");
    write_state_amps(w, *report.intermediate);
  }
  if (report.final_state.has_value()) {
    w.key("final_state");
    write_state_amps(w, *report.final_state);
  }

  if (!report.outcomes.empty()) {
    w.key("outcomes").begin_array();
    for (const auto& out : report.outcomes) {
      w.begin_object();
      w.key("first").value(to_string(out.first));
      w.key("second").value(to_string(out.second));
      w.key("joint_prob").value(out.joint_prob);
      w.key("classification").value(to_string(out.classification));
      w.key("matches_pattern").value(out.matches_pattern);
      w.key("corrected_fidelity");
      if (out.corrected_fidelity.has_value())
        w.value(*out.corrected_fidelity);
      else
        w.value_null();
      w.end_object();
    }
    w.end_array();
  }

  if (search != nullptr) {
    w.key("pairing_search").begin_object();
    w.key("rows").begin_array();
    for (const auto& row : search->rows) {
      w.begin_object();
      w.key("pairing").value(to_string(row.pairing));
      w.key("swapped").value(row.swapped);
      w.key("best_fidelity").value(row.best_fidelity);
      w.key("reproduced").value(row.reproduced);
      w.end_object();
    }
    w.end_array();
    w.key("best_index").value(static_cast<double>(search->best_index));
    w.end_object();
  }

  write_discrepancies(w, report.discrepancies);
  w.end_object();
  return w.str() + "\n";
}

std::string sweep_to_json(const SweepTable& table, const std::string& protocol,
                          const std::map<std::string, std::string>& parameters) {
  JsonWriter w;
  w.begin_object();
  w.key("command").value("sweep");
  w.key("parameters").begin_object();
  w.key("protocol").value(protocol);
  for (const auto& [k, v] : parameters) w.key(k).value(v);
  write_conventions(w);
  w.end_object();
  w.key("columns").begin_array();
  for (const auto& c : table.columns) w.value(c);
  w.end_array();
  w.key("rows").begin_array();
  for (const auto& row : table.rows) {
    w.begin_array();
    for (const auto& cell : row) {
      if (std::holds_alternative<std::monostate>(cell))
        w.value_null();
      else if (std::holds_alternative<double>(cell))
        w.value(std::get<double>(cell));
      else
        w.value(std::get<std::string>(cell));
    }
    w.end_array();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string sweep_to_csv(const SweepTable& table) {
  std::string out;
  for (size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const auto& cell = row[i];
      if (std::holds_alternative<double>(cell)) {
        const double v = std::get<double>(cell);
        out += std::isfinite(v) ? format_double(v) : "";
      } else if (std::holds_alternative<std::string>(cell)) {
        out += std::get<std::string>(cell);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace qsim::app
