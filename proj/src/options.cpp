#include "uqforge/options.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace uqforge {

namespace {

struct KnownOption {
  const char* key;
  OptionType type;
  const char* default_value;  // parsed like a file value
};

// Canonical keys with the documented defaults. Prefixes follow the example
// programs: bare env_*, ip_* for the inverse problem and its mh_/ml_ solvers,
// fp_* for the forward problem and its mc_ solver.
const KnownOption kRegistry[] = {
    // environment
    {"env_help", OptionType::String, ""},
    {"env_numSubEnvironments", OptionType::Integer, "1"},
    {"env_subDisplayFileName", OptionType::String, "."},
    {"env_subDisplayAllowAll", OptionType::Integer, "0"},
    {"env_subDisplayAllowedSet", OptionType::IntSet, ""},
    {"env_displayVerbosity", OptionType::Integer, "0"},
    {"env_syncVerbosity", OptionType::Integer, "0"},
    {"env_seed", OptionType::Integer, "0"},
    // statistical inverse problem
    {"ip_help", OptionType::String, ""},
    {"ip_computeSolution", OptionType::Integer, "1"},
    {"ip_dataOutputFileName", OptionType::String, "."},
    {"ip_dataOutputAllowedSet", OptionType::IntSet, ""},
    // Metropolis-Hastings solver
    {"ip_mh_dataOutputFileName", OptionType::String, "."},
    {"ip_mh_dataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_mh_initialPositionDataInputFileName", OptionType::String, "."},
    {"ip_mh_initialPositionDataInputFileType", OptionType::String, "m"},
    {"ip_mh_initialProposalCovMatrixDataInputFileName", OptionType::String, "."},
    {"ip_mh_initialProposalCovMatrixDataInputFileType", OptionType::String, "m"},
    {"ip_mh_rawChainDataInputFileName", OptionType::String, "."},
    {"ip_mh_rawChainDataInputFileType", OptionType::String, "m"},
    {"ip_mh_rawChainSize", OptionType::Integer, "100"},
    {"ip_mh_rawChainGenerateExtra", OptionType::Integer, "0"},
    {"ip_mh_rawChainDisplayPeriod", OptionType::Integer, "500"},
    {"ip_mh_rawChainMeasureRunTimes", OptionType::Integer, "1"},
    {"ip_mh_rawChainDataOutputPeriod", OptionType::Integer, "0"},
    {"ip_mh_rawChainDataOutputFileName", OptionType::String, "."},
    {"ip_mh_rawChainDataOutputFileType", OptionType::String, "m"},
    {"ip_mh_rawChainDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_mh_rawChainDataOutputAllowedSet", OptionType::IntSet, ""},
    {"ip_mh_filteredChainGenerate", OptionType::Integer, "0"},
    {"ip_mh_filteredChainDiscardedPortion", OptionType::Real, "0."},
    {"ip_mh_filteredChainLag", OptionType::Integer, "1"},
    {"ip_mh_filteredChainDataOutputFileName", OptionType::String, "."},
    {"ip_mh_filteredChainDataOutputFileType", OptionType::String, "m"},
    {"ip_mh_filteredChainDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_mh_filteredChainDataOutputAllowedSet", OptionType::IntSet, ""},
    {"ip_mh_displayCandidates", OptionType::Integer, "0"},
    {"ip_mh_putOutOfBoundsInChain", OptionType::Integer, "1"},
    {"ip_mh_tkUseLocalHessian", OptionType::Integer, "0"},
    {"ip_mh_tkUseNewtonComponent", OptionType::Integer, "1"},
    {"ip_mh_drMaxNumExtraStages", OptionType::Integer, "0"},
    {"ip_mh_drListOfScalesForExtraStages", OptionType::RealList, ""},
    {"ip_mh_drDuringAmNonAdaptiveInt", OptionType::Integer, "1"},
    {"ip_mh_amKeepInitialMatrix", OptionType::Integer, "0"},
    {"ip_mh_amInitialNonAdaptInterval", OptionType::Integer, "0"},
    {"ip_mh_amAdaptInterval", OptionType::Integer, "0"},
    {"ip_mh_amAdaptedMatricesDataOutputPeriod", OptionType::Integer, "0"},
    {"ip_mh_amAdaptedMatricesDataOutputFileName", OptionType::String, "."},
    {"ip_mh_amAdaptedMatricesDataOutputFileType", OptionType::String, "m"},
    {"ip_mh_amAdaptedMatricesDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_mh_amEta", OptionType::Real, "1."},
    {"ip_mh_amEpsilon", OptionType::Real, "1.e-5"},
    {"ip_mh_enableBrooksGelmanConvMonitor", OptionType::Integer, "0"},
    {"ip_mh_BrooksGelmanLag", OptionType::Integer, "100"},
    // multilevel solver
    {"ip_ml_restartOutput_levelPeriod", OptionType::Integer, "0"},
    {"ip_ml_restartOutput_baseNameForFiles", OptionType::String, "."},
    {"ip_ml_restartOutput_fileType", OptionType::String, "m"},
    {"ip_ml_restartInput_baseNameForFiles", OptionType::String, "."},
    {"ip_ml_restartInput_fileType", OptionType::String, "m"},
    {"ip_ml_stopAtEnd", OptionType::Integer, "0"},
    {"ip_ml_dataOutputFileName", OptionType::String, "."},
    {"ip_ml_dataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_ml_dataOutputAllowedSet", OptionType::IntSet, ""},
    {"ip_ml_loadBalanceAlgorithmId", OptionType::Integer, "2"},
    {"ip_ml_loadBalanceTreshold", OptionType::Real, "1.0"},
    {"ip_ml_minEffectiveSizeRatio", OptionType::Real, "0.85"},
    {"ip_ml_maxEffectiveSizeRatio", OptionType::Real, "0.91"},
    {"ip_ml_scaleCovMatrix", OptionType::Integer, "1"},
    {"ip_ml_minRejectionRate", OptionType::Real, "0.50"},
    {"ip_ml_maxRejectionRate", OptionType::Real, "0.75"},
    {"ip_ml_covRejectionRate", OptionType::Real, "0.25"},
    {"ip_ml_minAcceptableEta", OptionType::Real, "0."},
    {"ip_ml_totallyMute", OptionType::Integer, "1"},
    {"ip_ml_initialPositionDataInputFileName", OptionType::String, "."},
    {"ip_ml_initialPositionDataInputFileType", OptionType::String, "m"},
    {"ip_ml_initialProposalCovMatrixDataInputFileName", OptionType::String, "."},
    {"ip_ml_initialProposalCovMatrixDataInputFileType", OptionType::String, "m"},
    {"ip_ml_rawChainDataInputFileName", OptionType::String, "."},
    {"ip_ml_rawChainDataInputFileType", OptionType::String, "m"},
    {"ip_ml_rawChainSize", OptionType::Integer, "100"},
    {"ip_ml_rawChainGenerateExtra", OptionType::Integer, "0"},
    {"ip_ml_rawChainDisplayPeriod", OptionType::Integer, "500"},
    {"ip_ml_rawChainMeasureRunTimes", OptionType::Integer, "1"},
    {"ip_ml_rawChainDataOutputPeriod", OptionType::Integer, "0"},
    {"ip_ml_rawChainDataOutputFileName", OptionType::String, "."},
    {"ip_ml_rawChainDataOutputFileType", OptionType::String, "m"},
    {"ip_ml_rawChainDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_ml_rawChainDataOutputAllowedSet", OptionType::IntSet, ""},
    {"ip_ml_filteredChainGenerate", OptionType::Integer, "0"},
    {"ip_ml_filteredChainDiscardedPortion", OptionType::Real, "0."},
    {"ip_ml_filteredChainLag", OptionType::Integer, "1"},
    {"ip_ml_filteredChainDataOutputFileName", OptionType::String, "."},
    {"ip_ml_filteredChainDataOutputFileType", OptionType::String, "m"},
    {"ip_ml_filteredChainDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_ml_displayCandidates", OptionType::Integer, "0"},
    {"ip_ml_putOutOfBoundsInChain", OptionType::Integer, "1"},
    {"ip_ml_tkUseLocalHessian", OptionType::Integer, "0"},
    {"ip_ml_tkUseNewtonComponent", OptionType::Integer, "1"},
    {"ip_ml_drMaxNumExtraStages", OptionType::Integer, "0"},
    {"ip_ml_drScalesForExtraStages", OptionType::RealList, "0"},
    {"ip_ml_drDuringAmNonAdaptiveInt", OptionType::Integer, "1"},
    {"ip_ml_amKeepInitialMatrix", OptionType::Integer, "0"},
    {"ip_ml_amInitialNonAdaptInterval", OptionType::Integer, "0"},
    {"ip_ml_amAdaptInterval", OptionType::Integer, "0"},
    {"ip_ml_amAdaptedMatricesDataOutputPeriod", OptionType::Integer, "0"},
    {"ip_ml_amAdaptedMatricesDataOutputFileName", OptionType::String, "."},
    {"ip_ml_amAdaptedMatricesDataOutputFileType", OptionType::String, "m"},
    {"ip_ml_amAdaptedMatricesDataOutputAllowAll", OptionType::Integer, "0"},
    {"ip_ml_amEta", OptionType::Real, "1."},
    {"ip_ml_amEpsilon", OptionType::Real, "1.e-5"},
    // statistical forward problem
    {"fp_help", OptionType::String, ""},
    {"fp_computeSolution", OptionType::Integer, "1"},
    {"fp_computeCovariances", OptionType::Integer, "1"},
    {"fp_computeCorrelations", OptionType::Integer, "1"},
    {"fp_dataOutputFileName", OptionType::String, "."},
    {"fp_dataOutputAllowedSet", OptionType::IntSet, ""},
    // Monte Carlo solver
    {"fp_mc_dataOutputFileName", OptionType::String, "."},
    {"fp_mc_dataOutputAllowedSet", OptionType::IntSet, ""},
    {"fp_mc_pseq_dataOutputFileName", OptionType::String, "."},
    {"fp_mc_pseq_dataOutputAllowedSet", OptionType::IntSet, ""},
    {"fp_mc_qseq_dataInputFileName", OptionType::String, "."},
    {"fp_mc_qseq_size", OptionType::Integer, "100"},
    {"fp_mc_qseq_displayPeriod", OptionType::Integer, "500"},
    {"fp_mc_qseq_measureRunTimes", OptionType::Integer, "0"},
    {"fp_mc_qseq_dataOutputFileName", OptionType::String, "."},
    {"fp_mc_qseq_dataOutputAllowedSet", OptionType::IntSet, ""},
};

// Older spellings that appear in example input files; mapped onto the
// canonical suffixes above so those files parse unchanged.
const std::pair<const char*, const char*> kSuffixAliases[] = {
    {"rawChain_size", "rawChainSize"},
    {"rawChain_generateExtra", "rawChainGenerateExtra"},
    {"rawChain_displayPeriod", "rawChainDisplayPeriod"},
    {"rawChain_measureRunTimes", "rawChainMeasureRunTimes"},
    {"rawChain_dataInputFileName", "rawChainDataInputFileName"},
    {"rawChain_dataInputFileType", "rawChainDataInputFileType"},
    {"rawChain_dataOutputPeriod", "rawChainDataOutputPeriod"},
    {"rawChain_dataOutputFileName", "rawChainDataOutputFileName"},
    {"rawChain_dataOutputFileType", "rawChainDataOutputFileType"},
    {"rawChain_dataOutputAllowAll", "rawChainDataOutputAllowAll"},
    {"rawChain_dataOutputAllowedSet", "rawChainDataOutputAllowedSet"},
    {"filteredChain_generate", "filteredChainGenerate"},
    {"filteredChain_discardedPortion", "filteredChainDiscardedPortion"},
    {"filteredChain_lag", "filteredChainLag"},
    {"filteredChain_dataOutputFileName", "filteredChainDataOutputFileName"},
    {"filteredChain_dataOutputFileType", "filteredChainDataOutputFileType"},
    {"filteredChain_dataOutputAllowAll", "filteredChainDataOutputAllowAll"},
    {"filteredChain_dataOutputAllowedSet", "filteredChainDataOutputAllowedSet"},
    {"dr_maxNumExtraStages", "drMaxNumExtraStages"},
    {"dr_duringAmNonAdaptiveInt", "drDuringAmNonAdaptiveInt"},
    {"am_keepInitialMatrix", "amKeepInitialMatrix"},
    {"am_initialNonAdaptInterval", "amInitialNonAdaptInterval"},
    {"am_adaptInterval", "amAdaptInterval"},
    {"am_adaptedMatrices_dataOutputPeriod", "amAdaptedMatricesDataOutputPeriod"},
    {"am_adaptedMatrices_dataOutputFileName", "amAdaptedMatricesDataOutputFileName"},
    {"am_eta", "amEta"},
    {"am_epsilon", "amEpsilon"},
};

const KnownOption* find_known(const std::string& key) {
  for (const auto& k : kRegistry) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

std::string alias_suffix(const std::string& family, const std::string& suffix) {
  if (suffix == "dr_listOfScalesForExtraStages") {
    return family == "ml" ? "drScalesForExtraStages" : "drListOfScalesForExtraStages";
  }
  for (const auto& [from, to] : kSuffixAliases) {
    if (suffix == from) return to;
  }
  return suffix;
}

// Canonical key, plus the per-level multilevel decoration when present.
std::string normalize_key(const std::string& key) {
  const std::string mh = "ip_mh_";
  const std::string ml = "ip_ml_";
  if (key.rfind(mh, 0) == 0) {
    return mh + alias_suffix("mh", key.substr(mh.size()));
  }
  if (key.rfind(ml, 0) == 0) {
    std::string rest = key.substr(ml.size());
    std::string level;
    std::size_t p = 0;
    while (p < rest.size() && std::isdigit(static_cast<unsigned char>(rest[p]))) ++p;
    if (p > 0 && p < rest.size() && rest[p] == '_') {
      level = rest.substr(0, p + 1);
      rest = rest.substr(p + 1);
    }
    return ml + level + alias_suffix("ml", rest);
  }
  return key;
}

// For a per-level multilevel key, the registry entry that defines its type.
const KnownOption* find_registry_entry(const std::string& normalized, bool* per_level) {
  *per_level = false;
  if (const KnownOption* k = find_known(normalized)) return k;
  const std::string ml = "ip_ml_";
  if (normalized.rfind(ml, 0) == 0) {
    std::string rest = normalized.substr(ml.size());
    std::size_t p = 0;
    while (p < rest.size() && std::isdigit(static_cast<unsigned char>(rest[p]))) ++p;
    if (p > 0 && p < rest.size() && rest[p] == '_') {
      if (const KnownOption* k = find_known(ml + rest.substr(p + 1))) {
        *per_level = true;
        return k;
      }
    }
  }
  return nullptr;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> tokens;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

long long parse_int(const std::string& tok, long line) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  return v;
}

double parse_real(const std::string& tok, long line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) {
    throw ParseError("expected a real number, got '" + tok + "'", line);
  }
  return v;
}

std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

void OptionSet::assign_from_tokens(const std::string& key, const std::vector<std::string>& tokens, long line) {
  OptionValue& entry = entries_[key];
  switch (entry.type) {
    case OptionType::Integer:
      if (tokens.size() != 1) throw ParseError("option '" + key + "' expects one integer", line);
      entry.integer = parse_int(tokens[0], line);
      break;
    case OptionType::Real:
      if (tokens.size() != 1) throw ParseError("option '" + key + "' expects one real", line);
      entry.real = parse_real(tokens[0], line);
      break;
    case OptionType::String:
      entry.text = tokens.empty() ? std::string() : tokens[0];
      if (tokens.size() > 1) throw ParseError("option '" + key + "' expects one value", line);
      break;
    case OptionType::RealList:
      entry.real_list.clear();
      for (const auto& t : tokens) entry.real_list.push_back(parse_real(t, line));
      break;
    case OptionType::IntSet:
      entry.int_set.clear();
      for (const auto& t : tokens) entry.int_set.insert(static_cast<int>(parse_int(t, line)));
      break;
  }
}

OptionSet OptionSet::with_defaults() {
  OptionSet set;
  for (const auto& k : kRegistry) {
    OptionValue v;
    v.type = k.type;
    v.provenance = Provenance::Default;
    set.entries_[k.key] = v;
    set.assign_from_tokens(k.key, tokenize(k.default_value), 0);
    set.entries_[k.key].provenance = Provenance::Default;
  }
  return set;
}

OptionSet OptionSet::parse(const std::string& text) {
  OptionSet set = with_defaults();
  std::istringstream is(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value', got '" + line + "'", line_no);
    std::string key = line.substr(0, eq);
    if (const auto key_end = key.find_last_not_of(" \t"); key_end != std::string::npos) {
      key.erase(key_end + 1);
    } else {
      throw ParseError("empty option name", line_no);
    }
    if (key.find_first_of(" \t") != std::string::npos) {
      throw ParseError("option name '" + key + "' contains whitespace", line_no);
    }

    const std::vector<std::string> tokens = tokenize(line.substr(eq + 1));
    const std::string canonical = normalize_key(key);
    bool per_level = false;
    const KnownOption* known = find_registry_entry(canonical, &per_level);
    if (known == nullptr) {
      set.warnings_.push_back("unknown option '" + key + "' at line " + std::to_string(line_no) +
                              " (ignored)");
      continue;
    }
    if (per_level && set.entries_.count(canonical) == 0) {
      OptionValue v;
      v.type = known->type;
      set.entries_[canonical] = v;
    }
    set.assign_from_tokens(canonical, tokens, line_no);
    set.entries_[canonical].provenance = Provenance::File;
  }
  return set;
}

OptionSet OptionSet::parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open options file " + path.string());
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse(buffer.str());
}

const OptionValue& OptionSet::at(const std::string& key, OptionType expected) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw UqError("unknown option '" + key + "'");
  if (it->second.type != expected) throw UqError("option '" + key + "' accessed with the wrong type");
  return it->second;
}

long long OptionSet::get_int(const std::string& key) const { return at(key, OptionType::Integer).integer; }
double OptionSet::get_real(const std::string& key) const { return at(key, OptionType::Real).real; }
const std::string& OptionSet::get_string(const std::string& key) const { return at(key, OptionType::String).text; }
const std::vector<double>& OptionSet::get_real_list(const std::string& key) const {
  return at(key, OptionType::RealList).real_list;
}
const std::set<int>& OptionSet::get_int_set(const std::string& key) const {
  return at(key, OptionType::IntSet).int_set;
}

Provenance OptionSet::provenance(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw UqError("unknown option '" + key + "'");
  return it->second.provenance;
}

void OptionSet::override_int(const std::string& key, long long value) {
  auto& e = entries_[key];
  e.type = OptionType::Integer;
  e.integer = value;
  e.provenance = Provenance::Override;
}

void OptionSet::override_real(const std::string& key, double value) {
  auto& e = entries_[key];
  e.type = OptionType::Real;
  e.real = value;
  e.provenance = Provenance::Override;
}

void OptionSet::override_string(const std::string& key, const std::string& value) {
  auto& e = entries_[key];
  e.type = OptionType::String;
  e.text = value;
  e.provenance = Provenance::Override;
}

std::string OptionSet::resolve_ml_key(int level, const std::string& suffix) const {
  const std::string per_level = "ip_ml_" + std::to_string(level) + "_" + suffix;
  if (entries_.count(per_level) != 0) return per_level;
  return "ip_ml_" + suffix;
}

std::string OptionSet::emit() const {
  std::ostringstream os;
  for (const auto& [key, value] : entries_) {
    os << key << " = ";
    switch (value.type) {
      case OptionType::Integer:
        os << value.integer;
        break;
      case OptionType::Real:
        os << format_real(value.real);
        break;
      case OptionType::String:
        os << value.text;
        break;
      case OptionType::RealList:
        for (std::size_t i = 0; i < value.real_list.size(); ++i) {
          if (i) os << ' ';
          os << format_real(value.real_list[i]);
        }
        break;
      case OptionType::IntSet:
        for (auto it = value.int_set.begin(); it != value.int_set.end(); ++it) {
          if (it != value.int_set.begin()) os << ' ';
          os << *it;
        }
        break;
    }
    os << '\n';
  }
  return os.str();
}

EnvSpec EnvSpec::from_options(const OptionSet& options) {
  EnvSpec env;
  env.num_sub_environments = static_cast<int>(options.get_int("env_numSubEnvironments"));
  if (env.num_sub_environments < 1) throw UqError("env_numSubEnvironments must be >= 1");
  env.seed = options.get_int("env_seed");
  env.display_file_base = options.get_string("env_subDisplayFileName");
  env.display_allow_all = options.get_flag("env_subDisplayAllowAll");
  env.display_allowed = options.get_int_set("env_subDisplayAllowedSet");
  return env;
}

long long seed_for_worker(long long env_seed, int rank) {
  if (env_seed < 0) return static_cast<long long>(rank) - env_seed;
  return env_seed;
}

}  // namespace uqforge
