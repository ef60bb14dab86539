#include "blockboot/config.hpp"

#include "blockboot/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace blockboot {

std::string to_string(Command command) {
    switch (command) {
        case Command::generate: return "generate";
        case Command::bootstrap: return "bootstrap";
        case Command::experiment: return "experiment";
    }
    return "unknown";
}

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::invalid_argument(line ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

using Key = std::pair<std::string, std::string>;  // (section, key)

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"command", "seed", "output"}},
        {"generator", {"family", "n", "phi", "alpha0", "alpha1", "alpha2", "burn_in", "tail_bits", "coeffs"}},
        {"bootstrap", {"statistic", "B", "p", "eps", "c", "p_min"}},
        {"experiment", {"n_grid", "M", "R", "budget"}},
    };
    return keys;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string qualified(const Key& key) { return key.first.empty() ? key.second : key.first + "." + key.second; }

class Entries {
public:
    void add(Key key, Entry entry) {
        if (auto it = map_.find(key); it != map_.end()) {
            throw ConfigError(entry.line, fmt::format("duplicate key '{}' (first defined on line {})", qualified(key),
                                                      it->second.line));
        }
        map_.emplace(std::move(key), std::move(entry));
    }

    [[nodiscard]] const Entry* find(const std::string& section, const std::string& key) const {
        auto it = map_.find({section, key});
        return it == map_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] const Entry& require(const std::string& section, const std::string& key) const {
        if (const Entry* e = find(section, key)) return *e;
        throw ConfigError(0, fmt::format("missing required key '{}'", qualified({section, key})));
    }

    [[nodiscard]] const std::map<Key, Entry>& all() const noexcept { return map_; }

private:
    std::map<Key, Entry> map_;
};

std::uint64_t parse_u64(const Entry& e, const std::string& key) {
    std::uint64_t v = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || e.value.empty()) {
        throw ConfigError(e.line,
                          fmt::format("malformed value '{}' for key '{}' (expected a nonnegative integer)", e.value, key));
    }
    return v;
}

std::size_t parse_count(const Entry& e, const std::string& key, std::size_t minimum) {
    const auto v = parse_u64(e, key);
    if (v < minimum) throw ConfigError(e.line, fmt::format("{} = {} must be at least {}", key, v, minimum));
    return static_cast<std::size_t>(v);
}

double parse_real(std::string_view text, std::size_t line, const std::string& key) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(v)) {
        throw ConfigError(line, fmt::format("malformed value '{}' for key '{}' (expected a finite real)", text, key));
    }
    return v;
}

double parse_real(const Entry& e, const std::string& key) { return parse_real(e.value, e.line, key); }

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

std::vector<VolterraTerm> parse_coeffs(const Entry& e) {
    std::vector<VolterraTerm> terms;
    for (auto item : split_list(e.value)) {
        const auto c1 = item.find(':');
        const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
        if (c2 == std::string_view::npos) {
            throw ConfigError(e.line, fmt::format("malformed coefficient '{}' (expected lag1:lag2:g)", item));
        }
        const Entry lag1{std::string(trim(item.substr(0, c1))), e.line};
        const Entry lag2{std::string(trim(item.substr(c1 + 1, c2 - c1 - 1))), e.line};
        VolterraTerm t;
        t.lag1 = static_cast<std::size_t>(parse_u64(lag1, "coeffs"));
        t.lag2 = static_cast<std::size_t>(parse_u64(lag2, "coeffs"));
        t.coeff = parse_real(trim(item.substr(c2 + 1)), e.line, "coeffs");
        if (t.lag1 == t.lag2) {
            throw ConfigError(e.line, fmt::format("coefficient g({}, {}) lies on the diagonal; volterra2 requires lag1 != lag2",
                                                  t.lag1, t.lag2));
        }
        terms.push_back(t);
    }
    return terms;
}

Entries tokenize(std::string_view text) {
    Entries entries;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, fmt::format("malformed section header '{}'", line));
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty() || !known_keys().contains(section)) {
                throw ConfigError(line_no, fmt::format("unknown section [{}]", section));
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, fmt::format("expected 'key = value', got '{}'", line));
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(line_no, "missing key before '='");
        if (!known_keys().at(section).contains(key)) {
            throw ConfigError(line_no, fmt::format("unknown key '{}'", qualified({section, key})));
        }
        if (value.empty() && key != "coeffs") {
            throw ConfigError(line_no, fmt::format("missing value for key '{}'", qualified({section, key})));
        }
        entries.add({section, key}, {std::move(value), line_no});
    }
    return entries;
}

// Keys that are meaningful for the given command and generator family.
bool applies(const Key& key, Command command, Family family) {
    const auto& [section, name] = key;
    if (section.empty()) return true;
    if (section == "generator") {
        if (name == "family") return true;
        if (name == "n") return command != Command::experiment;
        if (name == "phi") return family == Family::ar1;
        if (name == "alpha0" || name == "alpha1" || name == "alpha2") return family == Family::garch11;
        if (name == "burn_in") return family == Family::ar1 || family == Family::garch11;
        if (name == "tail_bits") return family == Family::doubling_map;
        if (name == "coeffs") return family == Family::volterra2;
    }
    if (section == "bootstrap") {
        if (command == Command::generate) return false;
        if (name == "p") return command == Command::bootstrap;
        return true;
    }
    if (section == "experiment") return command == Command::experiment;
    return false;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    const Entries entries = tokenize(text);
    RunConfig cfg;

    const Entry& command = entries.require("", "command");
    if (command.value == "generate") cfg.command = Command::generate;
    else if (command.value == "bootstrap") cfg.command = Command::bootstrap;
    else if (command.value == "experiment") cfg.command = Command::experiment;
    else throw ConfigError(command.line, fmt::format("unknown command '{}' (expected generate, bootstrap or experiment)", command.value));

    const Entry& family = entries.require("generator", "family");
    const auto fam = parse_family(family.value);
    if (!fam) throw ConfigError(family.line, fmt::format("unknown generator family '{}'", family.value));

    for (const auto& [key, entry] : entries.all()) {
        if (!applies(key, cfg.command, *fam)) {
            throw ConfigError(entry.line, fmt::format("key '{}' does not apply to command {} with family {}",
                                                      qualified(key), to_string(cfg.command), family.value));
        }
    }

    if (const Entry* e = entries.find("", "seed")) cfg.seed = parse_u64(*e, "seed");
    if (const Entry* e = entries.find("", "output")) cfg.output = e->value;

    // Generator.
    cfg.generator.family = *fam;
    switch (*fam) {
        case Family::iid_gaussian: break;
        case Family::ar1: {
            const Entry& phi = entries.require("generator", "phi");
            cfg.generator.phi = parse_real(phi, "phi");
            if (std::abs(cfg.generator.phi) >= 1.0) {
                throw ConfigError(phi.line, fmt::format("phi = {} violates the stationarity bound |phi| < 1", phi.value));
            }
            cfg.generator.burn_in = kDefaultBurnIn;
            break;
        }
        case Family::garch11: {
            const Entry& a0 = entries.require("generator", "alpha0");
            const Entry& a1 = entries.require("generator", "alpha1");
            const Entry& a2 = entries.require("generator", "alpha2");
            cfg.generator.alpha0 = parse_real(a0, "alpha0");
            cfg.generator.alpha1 = parse_real(a1, "alpha1");
            cfg.generator.alpha2 = parse_real(a2, "alpha2");
            if (!(cfg.generator.alpha0 > 0.0)) throw ConfigError(a0.line, "alpha0 must be positive");
            if (cfg.generator.alpha1 < 0.0) throw ConfigError(a1.line, "alpha1 must be nonnegative");
            if (cfg.generator.alpha2 < 0.0) throw ConfigError(a2.line, "alpha2 must be nonnegative");
            if (!(cfg.generator.alpha1 + cfg.generator.alpha2 < 1.0)) {
                throw ConfigError(a1.line, fmt::format("alpha1 + alpha2 = {} violates the stationarity bound "
                                                       "alpha1 + alpha2 < 1 (alpha2 on line {})",
                                                       cfg.generator.alpha1 + cfg.generator.alpha2, a2.line));
            }
            cfg.generator.burn_in = kDefaultBurnIn;
            break;
        }
        case Family::doubling_map: break;
        case Family::volterra2: cfg.generator.volterra = parse_coeffs(entries.require("generator", "coeffs")); break;
    }
    if (const Entry* e = entries.find("generator", "burn_in")) cfg.generator.burn_in = parse_count(*e, "burn_in", 0);
    if (const Entry* e = entries.find("generator", "tail_bits")) {
        cfg.generator.tail_bits = parse_count(*e, "tail_bits", 1);
        if (cfg.generator.tail_bits > 64) throw ConfigError(e->line, "tail_bits must be at most 64");
    }

    if (cfg.command != Command::experiment) cfg.n = parse_count(entries.require("generator", "n"), "n", 1);

    // Bootstrap.
    if (cfg.command != Command::generate) {
        if (const Entry* e = entries.find("bootstrap", "statistic")) {
            static const std::set<std::string> statistics = {"mean", "gini", "variance_half", "product"};
            if (!statistics.contains(e->value)) {
                throw ConfigError(e->line, fmt::format("unknown statistic '{}' (expected mean, gini, variance_half or product)",
                                                       e->value));
            }
            cfg.statistic = e->value;
        }
        if (const Entry* e = entries.find("bootstrap", "B")) cfg.B = parse_count(*e, "B", 1);
        if (const Entry* e = entries.find("bootstrap", "p")) cfg.p = parse_count(*e, "p", 1);
        if (const Entry* e = entries.find("bootstrap", "eps")) {
            cfg.schedule.eps = parse_real(*e, "eps");
            if (!(cfg.schedule.eps > 0.0 && cfg.schedule.eps < 1.0)) throw ConfigError(e->line, "eps must lie in (0, 1)");
        }
        if (const Entry* e = entries.find("bootstrap", "c")) {
            cfg.schedule.c = parse_real(*e, "c");
            if (!(cfg.schedule.c > 0.0)) throw ConfigError(e->line, "c must be positive");
        }
        if (const Entry* e = entries.find("bootstrap", "p_min")) cfg.schedule.p_min = parse_count(*e, "p_min", 2);
        if (cfg.command == Command::bootstrap && cfg.statistic != "mean" && cfg.n < 2) {
            throw ConfigError(entries.require("generator", "n").line, "U-statistic bootstrap needs n >= 2");
        }
    }

    // Experiment.
    if (cfg.command == Command::experiment) {
        const Entry& grid = entries.require("experiment", "n_grid");
        for (auto item : split_list(grid.value)) {
            const std::size_t n = parse_count(Entry{std::string(item), grid.line}, "n_grid", 2);
            if (!cfg.n_grid.empty() && n <= cfg.n_grid.back()) throw ConfigError(grid.line, "n_grid must be strictly increasing");
            cfg.n_grid.push_back(n);
        }
        if (cfg.n_grid.empty()) throw ConfigError(grid.line, "n_grid is empty");
        if (const Entry* e = entries.find("experiment", "M")) cfg.M = parse_count(*e, "M", 100);
        if (const Entry* e = entries.find("experiment", "R")) cfg.R = parse_count(*e, "R", 1);
        if (const Entry* e = entries.find("experiment", "budget")) {
            cfg.budget = parse_real(*e, "budget");
            if (!(cfg.budget > 0.0)) throw ConfigError(e->line, "budget must be positive");
        }
    }
    return cfg;
}

std::string to_config_text(const RunConfig& cfg) {
    std::string out;
    auto line = [&out](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
    auto real = [](double v) { return fmt::format("{}", v); };

    line("command", to_string(cfg.command));
    line("seed", std::to_string(cfg.seed));
    line("output", cfg.output);

    const auto& g = cfg.generator;
    out += "[generator]\n";
    line("family", to_string(g.family));
    if (cfg.command != Command::experiment) line("n", std::to_string(cfg.n));
    switch (g.family) {
        case Family::iid_gaussian: break;
        case Family::ar1:
            line("phi", real(g.phi));
            line("burn_in", std::to_string(g.burn_in));
            break;
        case Family::garch11:
            line("alpha0", real(g.alpha0));
            line("alpha1", real(g.alpha1));
            line("alpha2", real(g.alpha2));
            line("burn_in", std::to_string(g.burn_in));
            break;
        case Family::doubling_map: line("tail_bits", std::to_string(g.tail_bits)); break;
        case Family::volterra2: {
            std::string coeffs;
            for (std::size_t i = 0; i < g.volterra.size(); ++i) {
                if (i) coeffs += ", ";
                coeffs += fmt::format("{}:{}:{}", g.volterra[i].lag1, g.volterra[i].lag2, g.volterra[i].coeff);
            }
            line("coeffs", coeffs);
            break;
        }
    }

    if (cfg.command != Command::generate) {
        out += "[bootstrap]\n";
        line("statistic", cfg.statistic);
        line("B", std::to_string(cfg.B));
        if (cfg.command == Command::bootstrap && cfg.p) line("p", std::to_string(*cfg.p));
        line("eps", real(cfg.schedule.eps));
        line("c", real(cfg.schedule.c));
        line("p_min", std::to_string(cfg.schedule.p_min));
    }
    if (cfg.command == Command::experiment) {
        out += "[experiment]\n";
        std::string grid;
        for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
            if (i) grid += ", ";
            grid += std::to_string(cfg.n_grid[i]);
        }
        line("n_grid", grid);
        line("M", std::to_string(cfg.M));
        line("R", std::to_string(cfg.R));
        line("budget", real(cfg.budget));
    }
    return out;
}

}  // namespace blockboot
