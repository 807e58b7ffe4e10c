#include "spalab/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "spalab/errors.hpp"

namespace spalab {

namespace {

// assets held in the last period before the pension started, per household;
// households whose start is not in the panel stay unclassified
std::unordered_map<int, double> assets_at_spa_minus1(const Panel& panel) {
    std::unordered_map<int, int> startAge;
    for (const PanelRecord& r : panel.rows)
        if (r.receiving) {
            auto it = startAge.find(r.householdId);
            if (it == startAge.end() || r.age < it->second) startAge[r.householdId] = r.age;
        }
    std::unordered_map<int, double> out;
    for (const PanelRecord& r : panel.rows) {
        auto it = startAge.find(r.householdId);
        if (it != startAge.end() && r.age == it->second - 1) out[r.householdId] = r.assets;
    }
    return out;
}

double median_stata(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const long n = static_cast<long>(v.size());
    const long rank = n * 50;
    if (rank % 100 == 0) {
        long i = rank / 100;
        return 0.5 * (v[static_cast<size_t>(i - 1)] + v[static_cast<size_t>(i)]);
    }
    return v[static_cast<size_t>(rank / 100)];
}

struct DummyGroup {
    std::string prefix;
    std::vector<int> levels; // ascending, first one dropped
    std::vector<std::string> names;
};

DummyGroup make_group(const std::string& prefix, const std::set<int>& levels,
                      const std::vector<std::string>* labels) {
    DummyGroup g;
    g.prefix = prefix;
    g.levels.assign(levels.begin(), levels.end());
    for (size_t k = 1; k < g.levels.size(); ++k) {
        int lv = g.levels[k];
        if (labels && lv >= 0 && lv < static_cast<int>(labels->size()))
            g.names.push_back(prefix + "_" + (*labels)[static_cast<size_t>(lv)]);
        else
            g.names.push_back(prefix + "_" + std::to_string(lv));
    }
    return g;
}

} // namespace

Design build_design(const Panel& panel, const RegressionSpec& spec) {
    if (panel.rows.empty())
        throw std::invalid_argument("build_design: empty panel");

    std::vector<const PanelRecord*> rows;
    rows.reserve(panel.rows.size());
    if (spec.subpopulation == Subpopulation::All) {
        for (const PanelRecord& r : panel.rows) rows.push_back(&r);
    } else {
        std::unordered_map<int, double> pre = assets_at_spa_minus1(panel);
        if (pre.empty())
            throw std::invalid_argument(
                "build_design: no household has an observed pension start");
        std::vector<double> values;
        values.reserve(pre.size());
        for (const auto& [h, a] : pre) values.push_back(a);
        const double median = median_stata(std::move(values));
        std::unordered_set<int> keep;
        for (const auto& [h, a] : pre)
            if (a > median) keep.insert(h);
        if (keep.empty())
            throw std::invalid_argument(
                "build_design: above-median subpopulation is empty");
        for (const PanelRecord& r : panel.rows)
            if (keep.count(r.householdId)) rows.push_back(&r);
    }

    std::set<int> ages, cohorts, types;
    for (const PanelRecord* r : rows) {
        ages.insert(r->age);
        cohorts.insert(r->cohort);
        types.insert(r->typeId);
    }

    std::vector<std::string> names = {"const", "treatment"};
    DummyGroup ageG, cohortG, typeG;
    bool unemployedCol = false;
    if (spec.ageDummies) {
        ageG = make_group("age", ages, nullptr);
        names.insert(names.end(), ageG.names.begin(), ageG.names.end());
    }
    if (spec.cohortDummies) {
        cohortG = make_group("cohort", cohorts, &panel.cohortLabels);
        names.insert(names.end(), cohortG.names.begin(), cohortG.names.end());
    }
    for (const std::string& c : spec.extraControls) {
        if (c == "type") {
            typeG = make_group("type", types, nullptr);
            names.insert(names.end(), typeG.names.begin(), typeG.names.end());
        } else if (c == "unemployed") {
            unemployedCol = true;
            names.push_back("unemployed");
        } else {
            throw ConfigError("regression.extra_controls", "unknown control '" + c + "'");
        }
    }

    const long n = static_cast<long>(rows.size());
    const long k = static_cast<long>(names.size());
    Design d;
    d.colNames = names;
    d.X = Eigen::MatrixXd::Zero(n, k);
    d.y.resize(n);
    d.clusters.resize(static_cast<size_t>(n));

    for (long i = 0; i < n; ++i) {
        const PanelRecord& r = *rows[static_cast<size_t>(i)];
        long j = 0;
        d.X(i, j++) = 1.0;
        const bool treated = spec.treatment == TreatmentForm::Below
                                 ? r.age < r.trueSpa
                                 : r.age <= r.trueSpa;
        d.X(i, j++) = treated ? 1.0 : 0.0;
        for (size_t g = 1; g < ageG.levels.size(); ++g)
            d.X(i, j++) = r.age == ageG.levels[g] ? 1.0 : 0.0;
        for (size_t g = 1; g < cohortG.levels.size(); ++g)
            d.X(i, j++) = r.cohort == cohortG.levels[g] ? 1.0 : 0.0;
        for (size_t g = 1; g < typeG.levels.size(); ++g)
            d.X(i, j++) = r.typeId == typeG.levels[g] ? 1.0 : 0.0;
        if (unemployedCol) d.X(i, j++) = r.unemployed ? 1.0 : 0.0;
        d.y(i) = r.worked ? 1.0 : 0.0;
        d.clusters[static_cast<size_t>(i)] = r.householdId;
    }
    return d;
}

int RegressionResult::find(const std::string& name) const {
    for (size_t j = 0; j < colNames.size(); ++j)
        if (colNames[j] == name) return static_cast<int>(j);
    return -1;
}

RegressionResult ols_cluster(const Design& d) {
    const long n = d.X.rows();
    const long k = d.X.cols();
    if (n != d.y.size() || n != static_cast<long>(d.clusters.size()))
        throw std::invalid_argument("ols_cluster: row count mismatch");
    if (n <= k) throw std::invalid_argument("ols_cluster: need more rows than columns");

    std::map<int, Eigen::VectorXd> scores; // cluster id -> X_g' u_g, sorted ids
    for (int c : d.clusters) scores.emplace(c, Eigen::VectorXd());
    const long g = static_cast<long>(scores.size());
    if (g < 2) throw std::invalid_argument("ols_cluster: need at least two clusters");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < k) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<std::string> dropped;
        for (long j = qr.rank(); j < k; ++j) {
            long col = perm(j);
            dropped.push_back(col < static_cast<long>(d.colNames.size())
                                  ? d.colNames[static_cast<size_t>(col)]
                                  : "col" + std::to_string(col));
        }
        std::string msg = "ols_cluster: design is rank deficient; offending columns:";
        for (const std::string& c : dropped) msg += " " + c;
        throw RankError(msg, std::move(dropped));
    }

    RegressionResult res;
    res.colNames = d.colNames;
    res.nObs = n;
    res.nClusters = g;
    res.coef = qr.solve(d.y);
    Eigen::VectorXd resid = d.y - d.X * res.coef;

    Eigen::MatrixXd rInv =
        qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd xtxInv = qr.colsPermutation() * (rInv * rInv.transpose()) *
                             qr.colsPermutation().transpose();

    for (auto& [c, s] : scores) s = Eigen::VectorXd::Zero(k);
    for (long i = 0; i < n; ++i)
        scores[d.clusters[static_cast<size_t>(i)]] += d.X.row(i).transpose() * resid(i);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [c, s] : scores) meat.noalias() += s * s.transpose();

    const double factor = (static_cast<double>(g) / static_cast<double>(g - 1)) *
                          (static_cast<double>(n - 1) / static_cast<double>(n - k));
    Eigen::MatrixXd v = factor * xtxInv * meat * xtxInv;
    res.vcov = 0.5 * (v + v.transpose());

    res.se.resize(k);
    res.z.resize(k);
    res.p.resize(k);
    for (long j = 0; j < k; ++j) {
        res.se(j) = std::sqrt(std::max(res.vcov(j, j), 0.0));
        res.z(j) = res.se(j) > 0.0 ? res.coef(j) / res.se(j)
                                   : std::numeric_limits<double>::quiet_NaN();
        res.p(j) = std::erfc(std::abs(res.z(j)) / std::sqrt(2.0));
    }
    return res;
}

std::vector<TreatmentCell> treatment_report(const Panel& re, const Panel& ri,
                                            const RegressionSpec& base) {
    if (re.seed != ri.seed || re.householdsPerCohort != ri.householdsPerCohort ||
        re.cohortLabels != ri.cohortLabels || re.rows.size() != ri.rows.size())
        throw ConfigError("analyze.panels", "panels come from different scenarios");
    for (size_t i = 0; i < re.rows.size(); ++i) {
        const PanelRecord& a = re.rows[i];
        const PanelRecord& b = ri.rows[i];
        if (a.householdId != b.householdId || a.age != b.age || a.cohort != b.cohort ||
            a.typeId != b.typeId || a.trueSpa != b.trueSpa)
            throw ConfigError("analyze.panels",
                              "panels disagree about exogenous histories (row " +
                                  std::to_string(i) + ")");
    }

    std::vector<TreatmentCell> cells;
    for (const Panel* panel : {&re, &ri})
        for (Subpopulation sub :
             {Subpopulation::All, Subpopulation::AboveMedianAssetsAtSpaMinus1}) {
            RegressionSpec spec = base;
            spec.subpopulation = sub;
            RegressionResult r = ols_cluster(build_design(*panel, spec));
            int j = r.find("treatment");
            TreatmentCell cell;
            cell.panel = panel == &re ? "re" : "ri";
            cell.population = sub == Subpopulation::All ? "all" : "above_median";
            cell.nObs = r.nObs;
            cell.nClusters = r.nClusters;
            cell.effect = r.coef(j);
            cell.se = r.se(j);
            cell.z = r.z(j);
            cell.p = r.p(j);
            cells.push_back(cell);
        }
    return cells;
}

} // namespace spalab
