// Deterministic report serialization: a small ordered JSON emitter plus the
// translation from protocol reports to the documented report layout.
//
// Numbers are printed with 17 significant digits so doubles round-trip;
// non-finite values serialize as null. Key order is fixed by construction,
// making byte-identical output for identical runs.

#pragma once

#include "qsim/protocols.hpp"

#include <string>
#include <variant>
#include <vector>

namespace qsim::app {

// One CSV/JSON table cell: a number, a string, or empty (UNDEFINED fields).
using Cell = std::variant<std::monostate, double, std::string>;

std::string format_double(double v);  // %.17g; non-finite -> "null"

class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  JsonWriter& value(bool v);
  JsonWriter& value_null();

  const std::string& str() const { return buf_; }

 private:
  void comma_and_indent();

  std::string buf_;
  std::vector<bool> has_items_;  // one entry per open container
  bool pending_key_ = false;
};

std::string escape_json(const std::string& s);

// Full report document for a single protocol run. When a pairing search was
// performed, its rows are embedded as a "pairing_search" section.
std::string report_to_json(const ProtocolReport<double>& report,
                           const std::string& command,
                           const PairingReport<double>* search = nullptr);

// Appended to the run parameters of every report.
void write_conventions(JsonWriter& w);

// Tabular sweep output.
struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string sweep_to_json(const SweepTable& table, const std::string& protocol,
                          const std::map<std::string, std::string>& parameters);
std::string sweep_to_csv(const SweepTable& table);

}  // namespace qsim::app
