#include "aniso/schema.hpp"

#include <cmath>
#include <utility>

#include "aniso/errors.hpp"
#include "aniso/io.hpp"

namespace aniso {

using nlohmann::json;

namespace {

bool is_integer(const json& v) {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
}

bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") return is_integer(v);
    throw ValidationError("schema uses unknown type \"" + t + "\"");
}

class Validator {
public:
    explicit Validator(const json& root) : root_(root) {}

    void check(const json& s, const json& v, const std::string& path, std::vector<std::string>& err) const {
        if (s.is_boolean()) {
            if (!s.get<bool>()) err.push_back(at(path) + "value not allowed");
            return;
        }
        if (s.contains("$ref")) {
            check(resolve(s["$ref"]), v, path, err);
            return;
        }
        if (s.contains("type")) {
            const json& t = s["type"];
            bool ok = false;
            if (t.is_string()) ok = has_type(v, t);
            else
                for (const auto& x : t) ok = ok || has_type(v, x);
            if (!ok) {
                err.push_back(at(path) + "expected type " + t.dump());
                return;
            }
        }
        if (s.contains("const") && v != s["const"]) err.push_back(at(path) + "must equal " + s["const"].dump());
        if (s.contains("enum")) {
            bool found = false;
            for (const auto& x : s["enum"]) found = found || x == v;
            if (!found) err.push_back(at(path) + "must be one of " + s["enum"].dump());
        }
        if (v.is_number()) {
            const double d = v.get<double>();
            if (s.contains("minimum") && d < s["minimum"].get<double>())
                err.push_back(at(path) + "must be >= " + fmt17(s["minimum"].get<double>()));
            if (s.contains("maximum") && d > s["maximum"].get<double>())
                err.push_back(at(path) + "must be <= " + fmt17(s["maximum"].get<double>()));
            if (s.contains("exclusiveMinimum") && d <= s["exclusiveMinimum"].get<double>())
                err.push_back(at(path) + "must be > " + fmt17(s["exclusiveMinimum"].get<double>()));
            if (s.contains("exclusiveMaximum") && d >= s["exclusiveMaximum"].get<double>())
                err.push_back(at(path) + "must be < " + fmt17(s["exclusiveMaximum"].get<double>()));
        }
        if (v.is_array()) {
            if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
                err.push_back(at(path) + "needs at least " + s["minItems"].dump() + " items");
            if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
                err.push_back(at(path) + "allows at most " + s["maxItems"].dump() + " items");
            if (s.contains("items"))
                for (std::size_t i = 0; i < v.size(); ++i)
                    check(s["items"], v[i], path + "/" + std::to_string(i), err);
        }
        if (v.is_object()) {
            if (s.contains("required"))
                for (const auto& k : s["required"])
                    if (!v.contains(k.get<std::string>()))
                        err.push_back(at(path) + "missing required key \"" + k.get<std::string>() + "\"");
            const json* props = s.contains("properties") ? &s["properties"] : nullptr;
            for (auto it = v.begin(); it != v.end(); ++it) {
                const std::string child = path + "/" + it.key();
                if (props && props->contains(it.key())) {
                    check((*props)[it.key()], it.value(), child, err);
                } else if (s.contains("additionalProperties")) {
                    const json& ap = s["additionalProperties"];
                    if (ap.is_boolean() && !ap.get<bool>()) err.push_back(at(child) + "unknown key");
                    else if (ap.is_object()) check(ap, it.value(), child, err);
                }
            }
        }
        if (s.contains("oneOf")) {
            std::vector<std::vector<std::string>> branch_errors;
            int matches = 0;
            for (const auto& b : s["oneOf"]) {
                std::vector<std::string> e;
                check(b, v, path, e);
                if (e.empty()) ++matches;
                branch_errors.push_back(std::move(e));
            }
            if (matches == 0) {
                // report the closest branch, preferring one whose discriminating const matched
                auto rank = [&](const std::vector<std::string>& e) {
                    bool const_miss = false;
                    for (const auto& m : e) const_miss = const_miss || m.find("must equal") != std::string::npos;
                    return std::make_pair(const_miss, e.size());
                };
                std::size_t best = 0;
                for (std::size_t i = 1; i < branch_errors.size(); ++i)
                    if (rank(branch_errors[i]) < rank(branch_errors[best])) best = i;
                err.insert(err.end(), branch_errors[best].begin(), branch_errors[best].end());
            } else if (matches > 1) {
                err.push_back(at(path) + "matches more than one alternative");
            }
        }
    }

private:
    static std::string at(const std::string& path) { return (path.empty() ? std::string("/") : path) + ": "; }

    const json& resolve(const json& ref) const {
        const std::string r = ref.get<std::string>();
        if (r.rfind("#", 0) != 0) throw ValidationError("only local schema references are supported: " + r);
        return root_.at(json::json_pointer(r.substr(1)));
    }

    const json& root_;
};

} // namespace

std::vector<std::string> schema_errors(const json& schema, const json& instance) {
    std::vector<std::string> err;
    Validator(schema).check(schema, instance, "", err);
    return err;
}

void validate_against(const json& schema, const json& instance) {
    const auto err = schema_errors(schema, instance);
    if (err.empty()) return;
    std::string msg = "config does not match the schema:";
    for (const auto& e : err) msg += "\n  " + e;
    throw ValidationError(msg);
}

} // namespace aniso
