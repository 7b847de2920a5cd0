#pragma once

// Pipeline configuration, read from a JSON document:
//
//   {
//     "data_dir": "data",              // relative to the config file
//     "train_start": "2016-01-01", "train_end": "2020-12-31",
//     "invest_date": "2021-01-01", "eval_date": "2021-06-01",
//     "capital": 100000, "n_draws": 10000, "risk_free": 0.01, "seed": 42,
//     "endpoint": "http://localhost:8000/history",   // optional, for `fetch`
//     "lstm": { "window": 50, ... },
//     "sectors": [ { "name": "it", "members": [ { "symbol": "IFY", "index_weight": 25.10 } ] } ]
//   }
//
// Every key except "sectors" is optional. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sectorfolio/checkpoint.hpp"
#include "sectorfolio/date.hpp"
#include "sectorfolio/io.hpp"
#include "sectorfolio/market_data.hpp"
#include "sectorfolio/portfolio_opt.hpp"

namespace sectorfolio {

struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::vector<SectorUniverse> sectors;
    Date train_start{2016, 1, 1};
    Date train_end{2020, 12, 31};
    Date invest_date{2021, 1, 1};
    Date eval_date{2021, 6, 1};
    double capital = 100000;
    std::size_t n_draws = kDefaultDraws;
    double risk_free = kDefaultRiskFree;
    forecast::LstmConfig lstm;
    std::uint64_t seed = 0;
    std::optional<std::string> endpoint;

    void validate() const {
        if (!(train_start < train_end && train_end <= invest_date && invest_date < eval_date))
            throw std::invalid_argument(
                "config: dates must satisfy train_start < train_end <= invest_date < eval_date");
        if (!(capital > 0))
            throw std::invalid_argument("config: capital must be positive");
        if (n_draws < 1)
            throw std::invalid_argument("config: n_draws must be at least 1");
        if (sectors.empty())
            throw std::invalid_argument("config: no sectors");
        std::set<std::string> names;
        for (const auto& s : sectors) {
            s.validate();
            if (!names.insert(s.sector_name).second)
                throw std::invalid_argument("config: duplicate sector " + s.sector_name);
        }
        lstm.validate();
    }

    const SectorUniverse& sector(const std::string& name) const {
        for (const auto& s : sectors)
            if (s.sector_name == name)
                return s;
        throw std::invalid_argument("unknown sector '" + name + "'");
    }

    /// Every symbol across sectors, first-appearance order.
    std::vector<std::string> all_symbols() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& s : sectors)
            for (const auto& m : s.members)
                if (seen.insert(m.symbol).second)
                    out.push_back(m.symbol);
        return out;
    }

    std::filesystem::path data_file(const std::string& symbol) const {
        return data_dir / (symbol + ".csv");
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& where) {
    if (!j.is_object())
        throw std::invalid_argument(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

} // namespace detail

inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    detail::reject_unknown(j,
                           {"data_dir", "sectors", "train_start", "train_end", "invest_date",
                            "eval_date", "capital", "n_draws", "risk_free", "lstm", "seed", "endpoint"},
                           "config");
    RunConfig c;
    try {
        if (j.contains("data_dir"))
            c.data_dir = j.at("data_dir").get<std::string>();
        if (c.data_dir.is_relative())
            c.data_dir = base_dir / c.data_dir;
        auto date = [&](const char* key, Date& out) {
            if (j.contains(key))
                out = Date::parse(j.at(key).get<std::string>());
        };
        date("train_start", c.train_start);
        date("train_end", c.train_end);
        date("invest_date", c.invest_date);
        date("eval_date", c.eval_date);
        if (j.contains("capital")) c.capital = j.at("capital").get<double>();
        if (j.contains("n_draws")) c.n_draws = j.at("n_draws").get<std::size_t>();
        if (j.contains("risk_free")) c.risk_free = j.at("risk_free").get<double>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
        if (j.contains("lstm")) c.lstm = forecast::lstm_config_from_json(j.at("lstm"));
        if (!j.contains("sectors") || !j.at("sectors").is_array())
            throw std::invalid_argument("config: 'sectors' must be an array");
        for (const auto& sj : j.at("sectors")) {
            detail::reject_unknown(sj, {"name", "members"}, "sector block");
            SectorUniverse s;
            s.sector_name = sj.at("name").get<std::string>();
            for (const auto& mj : sj.at("members")) {
                detail::reject_unknown(mj, {"symbol", "index_weight"}, "sector member");
                SectorMember m;
                m.symbol = mj.at("symbol").get<std::string>();
                if (mj.contains("index_weight"))
                    m.index_weight_percent = mj.at("index_weight").get<double>();
                s.members.push_back(m);
            }
            c.sectors.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(io::read_file(path), path.parent_path());
}

} // namespace sectorfolio
