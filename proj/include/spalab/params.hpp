#pragma once
#include <string>
#include <vector>

namespace spalab {

// Defined-benefit accrual: quadratic in the career-average wage, capped at its
// peak when the quadratic turns down (db2 > 0). With db2 <= 0 the cap never
// binds and the raw quadratic applies everywhere.
struct DBPensionParams {
    double db1 = 0.0;
    double db2 = 0.0;
};

// One observed household type: education/occupation cell with its own wage
// profile, income risk, unemployment risk and DB coverage.
struct TypeProfile {
    std::string label;
    bool hasDB = false;
    double delta0 = 0.0; // log-earnings quadratic in age: d0 + d1*age + d2*age^2
    double delta1 = 0.0;
    double delta2 = 0.0;
    double rho = 0.0;      // AR(1) persistence of the log-earnings shock
    double sigmaEps = 0.0; // innovation s.d.
    double sigmaInit = 0.0; // s.d. of the first-period shock
    std::vector<double> unempProb; // P(unemployed | income grid index), length = income grid size
    double share = 0.0;            // population share
};

// One-period survival probabilities. Survival is certain below
// firstStochasticAge and death is certain at ageDeath.
struct MortalityTable {
    int firstStochasticAge = 60;
    int ageDeath = 105;
    std::vector<double> survival; // survival[k] = P(alive at a+1 | alive at a), a = firstStochasticAge + k

    double at(int age) const {
        if (age < firstStochasticAge) return 1.0;
        if (age >= ageDeath) return 0.0;
        int k = age - firstStochasticAge;
        if (k >= static_cast<int>(survival.size())) return 0.0;
        return survival[k];
    }
};

struct ModelParams {
    // preferences
    double gamma = 2.320; // CRRA curvature
    double nu = 0.288;    // consumption weight in the Cobb-Douglas bundle
    double beta = 0.986;  // discount factor
    double theta = 2.899e-2; // bequest weight
    double bequestShift = 5000.0; // K, makes bequests a luxury
    double lambda = 0.001;        // information cost per nat

    // prices and transfers (pounds per year)
    double r = 0.02;
    double workHours = 0.30;     // w_h share of the time endowment
    double benefit = 3728.0;     // unemployment benefit b
    double statePension = 5587.0;
    double spouseIncome = 15000.0;

    // state pension age process
    double pSpaStep = 0.06;
    int spaInit = 60;
    int spaCap = 70;

    // ages
    int ageStart = 52;
    int ageWorkEnd = 80; // no work choice from this age on
    int ageDeath = 105;
    int ageSpouseRetire = 65;
    int ageEntry = 20; // workforce entry, SPA known to be spaInit then
    int spouseAgeOffset = 0;
    int aimeFreezeAge = 65; // career average frozen, DB claimable when not working

    DBPensionParams db{0.5914, -4.232e-6};
    std::vector<TypeProfile> types;
    MortalityTable mortality;

    int work_year_index(int age) const { return age - ageEntry + 1; }

    // throws std::invalid_argument naming the offending field
    void validate(int incomeGridSize) const;
};

// A small illustrative 4-type calibration used by tests and as the shipped
// default; every number not pinned by the config file lives here.
ModelParams default_params();

} // namespace spalab
