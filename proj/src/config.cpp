#include "rks/config.hpp"

#include "rks/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rks {

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + message),
      line_(line), field_(std::move(field))
{
}

namespace {

enum class Kind { integer, unsigned_integer, real, text, boolean, integer_list, real_list };

// Every accepted key and its type. Unknown keys are rejected.
const std::map<std::string, Kind>& schema()
{
    static const std::map<std::string, Kind> table = {
        {"kernel.name", Kind::text},
        {"kernel.dim", Kind::integer},
        {"kernel.p", Kind::real},
        {"kernel.alpha", Kind::real},
        {"kernel.rank", Kind::integer},
        {"kernel.width", Kind::real},
        {"kernel.spline_extent", Kind::integer},
        {"kernel.norm_sq", Kind::real},
        {"kernel.scale", Kind::real},
        {"kernel.decay_amplitude", Kind::real},
        {"lattice.gap", Kind::real},
        {"lattice.half_width", Kind::real},
        {"experiment.R", Kind::real},
        {"experiment.delta", Kind::real},
        {"experiment.mu", Kind::real},
        {"experiment.r", Kind::integer},
        {"experiment.trials", Kind::integer},
        {"experiment.functions_per_trial", Kind::integer},
        {"experiment.seed", Kind::unsigned_integer},
        {"experiment.frame_trials", Kind::integer},
        {"experiment.frame_safety", Kind::real},
        {"experiment.sweep_r", Kind::integer_list},
        {"experiment.sweep_mu", Kind::real_list},
        {"experiment.truncation_eps", Kind::real_list},
        {"experiment.truncation_members", Kind::integer},
        {"experiment.truncation_steps", Kind::integer},
        {"experiment.diagnostic_members", Kind::integer},
        {"experiment.moment_pairs", Kind::integer},
        {"experiment.moment_draws", Kind::integer},
        {"experiment.bernstein_trials", Kind::integer},
        {"experiment.bernstein_r", Kind::integer},
        {"experiment.threads", Kind::integer},
        {"quadrature.order", Kind::integer},
        {"quadrature.cell_width", Kind::real},
        {"quadrature.truncation_half_width", Kind::real},
        {"quadrature.dense_points", Kind::integer},
        {"quadrature.frame_cells", Kind::integer},
        {"quadrature.frame_order", Kind::integer},
        {"quadrature.rel_tail", Kind::real},
        {"output.dir", Kind::text},
        {"output.trials_csv", Kind::text},
        {"output.sweep_csv", Kind::text},
        {"output.report_json", Kind::text},
        {"output.constants_json", Kind::text},
        {"output.verify_txt", Kind::text},
        {"output.truncation", Kind::boolean},
    };
    return table;
}

bool known_section(const std::string& s)
{
    return s == "kernel" || s == "lattice" || s == "experiment" || s == "quadrature" || s == "output";
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

// Cuts a trailing comment, ignoring '#' inside strings.
std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"')
            quoted = !quoted;
        else if (c == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

ConfigScalar parse_scalar(const std::string& raw, int line, const std::string& key)
{
    const std::string s = trim(raw);
    if (s.empty())
        throw ConfigError(line, key, "missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError(line, key, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            char c = s[i];
            if (c == '\\') {
                if (i + 2 >= s.size())
                    throw ConfigError(line, key, "dangling escape in string");
                const char e = s[++i];
                switch (e) {
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                default: throw ConfigError(line, key, std::string("unknown escape \\") + e);
                }
            } else if (c == '"') {
                throw ConfigError(line, key, "unescaped quote inside string");
            }
            out += c;
        }
        return out;
    }
    if (s == "true")
        return true;
    if (s == "false")
        return false;

    std::string_view body = s;
    bool negative = false;
    if (body.front() == '+' || body.front() == '-') {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    if (!body.empty() && std::all_of(body.begin(), body.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        ConfigInteger v;
        v.negative = negative;
        const auto res = std::from_chars(body.data(), body.data() + body.size(), v.magnitude);
        if (res.ec != std::errc() || res.ptr != body.data() + body.size())
            throw ConfigError(line, key, "integer out of range: " + s);
        if (v.magnitude == 0)
            v.negative = false;
        return v;
    }
    double d = 0.0;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), d);
    if (res.ec != std::errc() || res.ptr != body.data() + body.size() || body.empty() || !std::isfinite(d) ||
        std::isalpha(static_cast<unsigned char>(body.front())))
        throw ConfigError(line, key, "cannot parse value '" + s + "'");
    return negative ? -d : d;
}

ConfigValue parse_value(const std::string& raw, int line, const std::string& key)
{
    const std::string s = trim(raw);
    ConfigValue v;
    v.line = line;
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError(line, key, "array must close on the same line");
        std::vector<ConfigScalar> items;
        const std::string inner = s.substr(1, s.size() - 2);
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            const char c = inner[i];
            if (quoted && c == '\\' && i + 1 < inner.size()) {
                cur += c;
                cur += inner[++i];
                continue;
            }
            if (c == '"')
                quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(parse_scalar(cur, line, key));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty())
            items.push_back(parse_scalar(cur, line, key));
        v.data = std::move(items);
        return v;
    }
    v.data = parse_scalar(s, line, key);
    return v;
}

bool valid_key(const std::string& k)
{
    return !k.empty() &&
           std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// ----------------------------------------------------------- typed access

double as_real(const ConfigScalar& s, int line, const std::string& key)
{
    if (const auto* d = std::get_if<double>(&s))
        return *d;
    if (const auto* i = std::get_if<ConfigInteger>(&s)) {
        const double m = static_cast<double>(i->magnitude);
        return i->negative ? -m : m;
    }
    throw ConfigError(line, key, "expected a number");
}

long long as_integer(const ConfigScalar& s, int line, const std::string& key)
{
    const auto* i = std::get_if<ConfigInteger>(&s);
    if (!i)
        throw ConfigError(line, key, "expected an integer");
    if (i->magnitude > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
        throw ConfigError(line, key, "integer out of range");
    const auto m = static_cast<long long>(i->magnitude);
    return i->negative ? -m : m;
}

std::uint64_t as_unsigned(const ConfigScalar& s, int line, const std::string& key)
{
    const auto* i = std::get_if<ConfigInteger>(&s);
    if (!i || i->negative)
        throw ConfigError(line, key, "expected a non-negative integer");
    return i->magnitude;
}

const ConfigScalar& scalar_of(const ConfigValue& v, const std::string& key)
{
    const auto* s = std::get_if<ConfigScalar>(&v.data);
    if (!s)
        throw ConfigError(v.line, key, "expected a single value, found an array");
    return *s;
}

const std::vector<ConfigScalar>& list_of(const ConfigValue& v, const std::string& key)
{
    const auto* l = std::get_if<std::vector<ConfigScalar>>(&v.data);
    if (!l)
        throw ConfigError(v.line, key, "expected an array");
    return *l;
}

std::string render_scalar(const ConfigScalar& s, Kind kind, int line, const std::string& key)
{
    switch (kind) {
    case Kind::real:
    case Kind::real_list:
        return format_double(as_real(s, line, key));
    case Kind::integer:
    case Kind::integer_list:
    case Kind::unsigned_integer: {
        const auto* i = std::get_if<ConfigInteger>(&s);
        if (!i)
            throw ConfigError(line, key, "expected an integer");
        return (i->negative ? "-" : "") + std::to_string(i->magnitude);
    }
    case Kind::boolean: {
        const auto* b = std::get_if<bool>(&s);
        if (!b)
            throw ConfigError(line, key, "expected true or false");
        return *b ? "true" : "false";
    }
    case Kind::text: {
        const auto* t = std::get_if<std::string>(&s);
        if (!t)
            throw ConfigError(line, key, "expected a quoted string");
        std::string out = "\"";
        for (char c : *t) {
            if (c == '"' || c == '\\')
                out += '\\';
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            if (c == '\t') {
                out += "\\t";
                continue;
            }
            out += c;
        }
        return out + "\"";
    }
    }
    return {};
}

} // namespace

ConfigDocument ConfigDocument::parse(const std::string& text)
{
    ConfigDocument doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(number, "", "malformed section header '" + body + "'");
            section = trim(body.substr(1, body.size() - 2));
            if (!known_section(section))
                throw ConfigError(number, section, "unknown section");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(number, "", "expected 'key = value', found '" + body + "'");
        const std::string key = trim(body.substr(0, eq));
        if (!valid_key(key))
            throw ConfigError(number, key, "invalid key");
        if (section.empty())
            throw ConfigError(number, key, "key outside any section");
        const std::string full = section + "." + key;
        if (!schema().count(full))
            throw ConfigError(number, full, "unknown key");
        if (doc.entries_.count(full))
            throw ConfigError(number, full, "duplicate key (first set on line " +
                                                std::to_string(doc.entries_.at(full).line) + ")");
        doc.entries_[full] = parse_value(body.substr(eq + 1), number, full);
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "", "cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ConfigDocument::canonical() const
{
    std::string out;
    for (const auto& [key, value] : entries_) {
        const Kind kind = schema().at(key);
        out += key;
        out += '=';
        if (const auto* list = std::get_if<std::vector<ConfigScalar>>(&value.data)) {
            out += '[';
            for (std::size_t i = 0; i < list->size(); ++i) {
                if (i)
                    out += ',';
                out += render_scalar((*list)[i], kind, value.line, key);
            }
            out += ']';
        } else {
            out += render_scalar(std::get<ConfigScalar>(value.data), kind, value.line, key);
        }
        out += '\n';
    }
    return out;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string ConfigDocument::digest() const
{
    return sha256_hex(canonical());
}

LoadedConfig interpret_config(ConfigDocument doc)
{
    LoadedConfig out;
    ExperimentConfig& e = out.experiment;
    OutputConfig& o = out.output;
    const auto& entries = doc.entries();

    auto line_of = [&](const std::string& key) {
        auto it = entries.find(key);
        return it == entries.end() ? 0 : it->second.line;
    };
    auto find = [&](const std::string& key) -> const ConfigValue* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto real = [&](const std::string& key, double& dst) {
        if (const ConfigValue* v = find(key))
            dst = as_real(scalar_of(*v, key), v->line, key);
    };
    auto integer = [&](const std::string& key, int& dst) {
        if (const ConfigValue* v = find(key))
            dst = static_cast<int>(as_integer(scalar_of(*v, key), v->line, key));
    };
    auto text = [&](const std::string& key, std::string& dst) {
        if (const ConfigValue* v = find(key)) {
            const auto* s = std::get_if<std::string>(&scalar_of(*v, key));
            if (!s)
                throw ConfigError(v->line, key, "expected a quoted string");
            dst = *s;
        }
    };
    auto check = [&](bool ok, const std::string& key, const std::string& what) {
        if (!ok)
            throw ConfigError(line_of(key), key, what);
    };

    // [kernel]
    if (!find("kernel.name"))
        throw ConfigError(0, "kernel.name", "required field is missing");
    text("kernel.name", e.kernel.name);
    const std::string& name = e.kernel.name;
    check(name == "hermite" || name == "spline" || name == "gaussian_rank1" || name == "envelope" ||
              name == "zero",
          "kernel.name", "unknown kernel '" + name + "' (hermite, spline, gaussian_rank1, envelope, zero)");
    integer("kernel.dim", e.kernel.dim);
    check(e.kernel.dim == 1 || e.kernel.dim == 2, "kernel.dim", "must be 1 or 2");
    real("kernel.p", e.kernel.p);
    check(e.kernel.p > 1.0, "kernel.p", "must lie in (1, inf)");
    e.kernel.alpha = e.kernel.dim == 1 ? 4.0 : 5.0;
    real("kernel.alpha", e.kernel.alpha);
    check(e.kernel.alpha > 0.0, "kernel.alpha", "must be positive");
    integer("kernel.rank", e.kernel.rank);
    check(e.kernel.rank >= 1 && e.kernel.rank <= 40, "kernel.rank", "must lie in [1, 40]");
    real("kernel.width", e.kernel.width);
    check(e.kernel.width > 0.0, "kernel.width", "must be positive");
    integer("kernel.spline_extent", e.kernel.spline_extent);
    check(e.kernel.spline_extent >= 1 && e.kernel.spline_extent <= 200, "kernel.spline_extent",
          "must lie in [1, 200]");
    real("kernel.norm_sq", e.kernel.norm_sq);
    check(e.kernel.norm_sq > 0.0, "kernel.norm_sq", "must be positive");
    real("kernel.scale", e.kernel.scale);
    check(e.kernel.scale != 0.0, "kernel.scale", "must be nonzero");
    if (find("kernel.decay_amplitude")) {
        double C = 0.0;
        real("kernel.decay_amplitude", C);
        check(C > 0.0, "kernel.decay_amplitude", "must be positive");
        e.kernel.decay_amplitude = C;
    }

    // [lattice]
    if (find("lattice.gap")) {
        double g = 0.0;
        real("lattice.gap", g);
        e.lattice.gap = g;
    }
    real("lattice.half_width", e.lattice.half_width);

    // [experiment]
    real("experiment.R", e.R);
    real("experiment.delta", e.delta);
    real("experiment.mu", e.mu);
    integer("experiment.r", e.r);
    integer("experiment.trials", e.trials);
    integer("experiment.functions_per_trial", e.functions_per_trial);
    if (const ConfigValue* v = find("experiment.seed"))
        e.seed = as_unsigned(scalar_of(*v, "experiment.seed"), v->line, "experiment.seed");
    integer("experiment.frame_trials", e.frame_trials);
    real("experiment.frame_safety", e.frame_safety);
    if (const ConfigValue* v = find("experiment.sweep_r")) {
        e.sweep_r.clear();
        for (const auto& s : list_of(*v, "experiment.sweep_r"))
            e.sweep_r.push_back(static_cast<int>(as_integer(s, v->line, "experiment.sweep_r")));
    }
    if (const ConfigValue* v = find("experiment.sweep_mu")) {
        e.sweep_mu.clear();
        for (const auto& s : list_of(*v, "experiment.sweep_mu"))
            e.sweep_mu.push_back(as_real(s, v->line, "experiment.sweep_mu"));
    }
    if (const ConfigValue* v = find("experiment.truncation_eps")) {
        e.truncation_eps.clear();
        for (const auto& s : list_of(*v, "experiment.truncation_eps"))
            e.truncation_eps.push_back(as_real(s, v->line, "experiment.truncation_eps"));
    }
    integer("experiment.truncation_members", e.truncation_members);
    integer("experiment.truncation_steps", e.truncation_steps);
    integer("experiment.diagnostic_members", e.diagnostic_members);
    integer("experiment.moment_pairs", e.moment_pairs);
    integer("experiment.moment_draws", e.moment_draws);
    integer("experiment.bernstein_trials", e.bernstein_trials);
    integer("experiment.bernstein_r", e.bernstein_r);
    {
        int threads = 0;
        integer("experiment.threads", threads);
        check(threads >= 0, "experiment.threads", "must be non-negative");
        e.threads = static_cast<unsigned>(threads);
    }

    // [quadrature]
    integer("quadrature.order", e.space.op.quad.order);
    check(e.space.op.quad.order >= 2 && e.space.op.quad.order <= 64, "quadrature.order", "must lie in [2, 64]");
    real("quadrature.cell_width", e.space.op.quad.cell_width);
    check(e.space.op.quad.cell_width > 0.0, "quadrature.cell_width", "must be positive");
    real("quadrature.truncation_half_width", e.space.op.truncation_half_width);
    check(e.space.op.truncation_half_width > 0.0, "quadrature.truncation_half_width", "must be positive");
    integer("quadrature.dense_points", e.space.op.dense_points);
    check(e.space.op.dense_points >= 64, "quadrature.dense_points", "must be at least 64");
    integer("quadrature.frame_cells", e.space.frame_cells);
    check(e.space.frame_cells >= 1, "quadrature.frame_cells", "must be at least 1");
    integer("quadrature.frame_order", e.space.frame_order);
    check(e.space.frame_order >= 1 && e.space.frame_order <= 64, "quadrature.frame_order", "must lie in [1, 64]");
    real("quadrature.rel_tail", e.space.rel_tail);
    check(e.space.rel_tail > 0.0 && e.space.rel_tail < 1.0, "quadrature.rel_tail", "must lie in (0, 1)");

    // [output]
    {
        std::string dir = o.dir.string();
        text("output.dir", dir);
        o.dir = dir;
    }
    text("output.trials_csv", o.trials_csv);
    text("output.sweep_csv", o.sweep_csv);
    text("output.report_json", o.report_json);
    text("output.constants_json", o.constants_json);
    text("output.verify_txt", o.verify_txt);
    if (const ConfigValue* v = find("output.truncation")) {
        const auto* b = std::get_if<bool>(&scalar_of(*v, "output.truncation"));
        if (!b)
            throw ConfigError(v->line, "output.truncation", "expected true or false");
        o.truncation = *b;
    }

    // Cross-field invariants; messages start with the field name.
    try {
        e.validate();
    } catch (const ContractError& err) {
        const std::string msg = err.what();
        const auto colon = msg.find(':');
        const std::string field = colon == std::string::npos ? std::string() : msg.substr(0, colon);
        const std::string what = colon == std::string::npos ? msg : trim(msg.substr(colon + 1));
        throw ConfigError(line_of(field), field, what);
    }

    out.digest = doc.digest();
    out.document = std::move(doc);
    return out;
}

LoadedConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override)
{
    ConfigDocument doc = ConfigDocument::load(path);
    if (seed_override) {
        ConfigValue v;
        v.data = ConfigScalar{ConfigInteger{false, *seed_override}};
        doc.set("experiment.seed", std::move(v));
    }
    return interpret_config(std::move(doc));
}

} // namespace rks
