#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "verimap/errors.hpp"

namespace verimap::stats {

// Column-oriented table with numeric and factor (string) columns; the minimal
// substrate the model-fitting code needs.
class DataTable {
public:
    void add_numeric(const std::string& name, std::vector<double> values) {
        check_len(name, values.size());
        numeric_[name] = std::move(values);
    }

    void add_factor(const std::string& name, std::vector<std::string> values) {
        check_len(name, values.size());
        factor_[name] = std::move(values);
    }

    std::size_t n_rows() const { return n_rows_; }

    bool has_numeric(const std::string& name) const { return numeric_.count(name) > 0; }
    bool has_factor(const std::string& name) const { return factor_.count(name) > 0; }

    const std::vector<double>& numeric(const std::string& name) const {
        auto it = numeric_.find(name);
        if (it == numeric_.end()) throw DataError("no numeric column \"" + name + "\"");
        return it->second;
    }

    const std::vector<std::string>& factor(const std::string& name) const {
        auto it = factor_.find(name);
        if (it == factor_.end()) throw DataError("no factor column \"" + name + "\"");
        return it->second;
    }

    /// Sorted distinct levels of a factor column.
    std::vector<std::string> levels(const std::string& name) const {
        const auto& col = factor(name);
        std::vector<std::string> out(col.begin(), col.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    void check_len(const std::string& name, std::size_t len) {
        if (n_rows_ == 0 && numeric_.empty() && factor_.empty()) {
            n_rows_ = len;
        } else if (len != n_rows_) {
            throw DataError("column \"" + name + "\" length " + std::to_string(len) +
                            " != table rows " + std::to_string(n_rows_));
        }
    }

    std::size_t n_rows_ = 0;
    std::map<std::string, std::vector<double>> numeric_;
    std::map<std::string, std::vector<std::string>> factor_;
};

}  // namespace verimap::stats
