#pragma once

#include <string>
#include <utility>
#include <vector>

namespace coarse {

// One verified failure: what rule broke, on which sets/points, what was
// measured and what the rule required.
struct Violation {
    std::string kind;
    std::vector<std::string> subjects;
    std::string measured;
    std::string required;
};

// Verdict is pass exactly when the violation list is empty. Notes carry
// non-failure findings (e.g. the scale at which a union check succeeded).
struct VerificationReport {
    std::vector<Violation> violations;
    std::vector<std::string> notes;

    bool pass() const { return violations.empty(); }

    void add(std::string kind, std::vector<std::string> subjects,
             std::string measured, std::string required) {
        violations.push_back({std::move(kind), std::move(subjects),
                              std::move(measured), std::move(required)});
    }

    void note(std::string text) { notes.push_back(std::move(text)); }

    void merge(const VerificationReport& other) {
        violations.insert(violations.end(), other.violations.begin(),
                          other.violations.end());
        notes.insert(notes.end(), other.notes.begin(), other.notes.end());
    }

    std::string summary() const {
        if (pass()) return "pass";
        std::string s = "fail (" + std::to_string(violations.size()) + " violations):";
        for (const auto& v : violations) {
            s += "\n  [" + v.kind + "]";
            for (const auto& sub : v.subjects) s += " " + sub;
            s += " measured=" + v.measured + " required=" + v.required;
        }
        return s;
    }
};

}  // namespace coarse
