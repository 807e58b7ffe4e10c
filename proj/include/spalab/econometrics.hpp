#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spalab/simulate.hpp"

namespace spalab {

// Which households enter the regression sample. The above-median split ranks
// households by their assets in the last period before the pension started,
// with the median taken over every household whose start is observed.
enum class Subpopulation { All, AboveMedianAssetsAtSpaMinus1 };

// Treatment indicator: strictly before the pension age (the default; "not yet
// eligible" is what moves behavior in an integer-age model) or including the
// first eligible year.
enum class TreatmentForm { Below, AtOrBelow };

struct RegressionSpec {
    TreatmentForm treatment = TreatmentForm::Below;
    bool ageDummies = true;
    bool cohortDummies = true;
    // extra model-generated controls by name: "type", "unemployed"
    std::vector<std::string> extraControls;
    Subpopulation subpopulation = Subpopulation::All;
};

// Regression inputs: response is the work indicator, rows cluster by
// household. Dummy groups drop their first level; levels come from the rows
// that survive the subpopulation filter, so a group without variation
// contributes no columns.
struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<int> clusters;
    std::vector<std::string> colNames;
};

Design build_design(const Panel& panel, const RegressionSpec& spec);

struct RegressionResult {
    std::vector<std::string> colNames;
    Eigen::VectorXd coef;
    Eigen::MatrixXd vcov; // cluster-robust, small-sample corrected
    Eigen::VectorXd se;
    Eigen::VectorXd z;
    Eigen::VectorXd p; // two-sided, against the normal
    long nObs = 0;
    long nClusters = 0;

    int find(const std::string& name) const; // column index, -1 when absent
};

// Pooled OLS with CR1 cluster-robust covariance: factor
// (G/(G-1))*((N-1)/(N-K)) on the sandwich. Throws RankError naming the
// pivoted-out columns when X loses full column rank, std::invalid_argument
// with fewer than two clusters.
RegressionResult ols_cluster(const Design& d);

// One row of the comparison table the analyze step exports.
struct TreatmentCell {
    std::string panel;      // "re" | "ri"
    std::string population; // "all" | "above_median"
    long nObs = 0;
    long nClusters = 0;
    double effect = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;
};

// Treatment effects for both panels on the whole population and the
// above-median-assets subpopulation, in a fixed row order
// (re/all, re/above_median, ri/all, ri/above_median). The two panels must
// come from the same scenario and seed (same households, ages, cohorts and
// exogenous histories); mismatches throw ConfigError.
std::vector<TreatmentCell> treatment_report(const Panel& re, const Panel& ri,
                                            const RegressionSpec& base = {});

} // namespace spalab
