#include "fraclab/inequality.hpp"

#include <cstdio>
#include <fstream>

namespace fraclab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void write_reports_csv(const std::vector<InequalityReport>& reports, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_reports_csv: cannot open " + path);
    os << "name,domain,fixture,delta,p,q,tau,h,lhs,rhs,ratio\n";
    for (const auto& r : reports) {
        os << r.name << ',' << r.domain_name << ',' << r.fixture << ',' << fmt(r.delta) << ',' << fmt(r.p) << ','
           << fmt(r.q) << ',' << fmt(r.tau) << ',' << fmt(r.h) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ','
           << fmt(r.ratio) << "\n";
    }
}

void write_reports_json(const std::vector<InequalityReport>& reports, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["name"] = r.name;
        j["domain"] = r.domain_name;
        j["fixture"] = r.fixture;
        j["delta"] = r.delta;
        j["p"] = r.p;
        j["q"] = r.q;
        j["tau"] = r.tau;
        j["kappa"] = r.kappa;
        j["h"] = r.h;
        j["lhs"] = r.lhs;
        j["rhs"] = r.rhs;
        j["ratio"] = r.ratio;
        j["degenerate"] = r.degenerate;
        if (!r.extra.is_null()) j["extra"] = r.extra;
        if (!r.refinement_trace.empty()) {
            nlohmann::json tr = nlohmann::json::array();
            for (const auto& [h, ratio] : r.refinement_trace) tr.push_back({h, ratio});
            j["refinement_trace"] = tr;
        }
        arr.push_back(std::move(j));
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_reports_json: cannot open " + path);
    os << arr.dump(2) << "\n";
}

}  // namespace fraclab
