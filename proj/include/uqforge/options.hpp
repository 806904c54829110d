#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "uqforge/errors.hpp"

namespace uqforge {

enum class OptionType { Integer, Real, String, RealList, IntSet };
enum class Provenance { Default, File, Override };

struct OptionValue {
  OptionType type = OptionType::String;
  long long integer = 0;
  double real = 0.0;
  std::string text;
  std::vector<double> real_list;
  std::set<int> int_set;
  Provenance provenance = Provenance::Default;
};

// Flat key=value option map seeded with the full default tables (environment,
// inverse problem, Metropolis-Hastings, multilevel, forward problem, Monte
// Carlo). Unknown file keys are recorded as warnings, never errors.
class OptionSet {
 public:
  static OptionSet with_defaults();
  static OptionSet parse(const std::string& text);
  static OptionSet parse_file(const std::filesystem::path& path);

  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  const std::vector<double>& get_real_list(const std::string& key) const;
  const std::set<int>& get_int_set(const std::string& key) const;
  bool get_flag(const std::string& key) const { return get_int(key) != 0; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  Provenance provenance(const std::string& key) const;
  bool is_set(const std::string& key) const { return provenance(key) != Provenance::Default; }

  void override_int(const std::string& key, long long value);
  void override_real(const std::string& key, double value);
  void override_string(const std::string& key, const std::string& value);

  // "ip_ml_<level>_<suffix>" when that override exists, else "ip_ml_<suffix>".
  std::string resolve_ml_key(int level, const std::string& suffix) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(const std::string& w) { warnings_.push_back(w); }

  // Known keys, sorted, in parseable key = value form.
  std::string emit() const;

  const std::map<std::string, OptionValue>& entries() const { return entries_; }

 private:
  const OptionValue& at(const std::string& key, OptionType expected) const;
  void assign_from_tokens(const std::string& key, const std::vector<std::string>& tokens, long line);

  std::map<std::string, OptionValue> entries_;
  std::vector<std::string> warnings_;
};

// Environment subset in struct form.
struct EnvSpec {
  int num_sub_environments = 1;
  long long seed = 0;
  std::string display_file_base = ".";
  bool display_allow_all = false;
  std::set<int> display_allowed;

  static EnvSpec from_options(const OptionSet& options);
};

// env_seed < 0 maps to rank + |env_seed|; otherwise every rank shares it.
long long seed_for_worker(long long env_seed, int rank);

}  // namespace uqforge
