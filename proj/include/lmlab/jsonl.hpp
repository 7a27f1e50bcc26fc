#pragma once

#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "lmlab/errors.hpp"

namespace lmlab {

using json = nlohmann::json;

// Streams one parsed object per non-empty line. Malformed lines raise
// ValidationError with the line number.
inline void for_each_jsonl(const std::string& path, const std::function<void(const json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        fn(obj);
    }
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : out_(path) {
        if (!out_) throw ValidationError("cannot open output file: " + path);
    }

    void write(const json& obj) { out_ << obj.dump() << '\n'; }

private:
    std::ofstream out_;
};

}  // namespace lmlab
