#include "spalab/state_space.hpp"

#include <stdexcept>

namespace spalab {

StateSpace make_state_space(const ModelParams& params, const GridSpec& gs) {
    params.validate(gs.nIncome);
    StateSpace ss;
    ss.params = params;
    ss.assets = build_grid(gs.nAssets, gs.assetMin, gs.assetMax, gs.assetCurv);
    if (gs.nAime >= 2) {
        ss.aime = build_grid(gs.nAime, gs.aimeMin, gs.aimeMax, gs.aimeCurv);
    } else {
        ss.aime.points = {gs.aimeMin};
    }
    ss.chains.reserve(params.types.size());
    for (const auto& t : params.types)
        ss.chains.push_back(discretize_ar1(t.rho, t.sigmaEps, t.sigmaInit, gs.nIncome));
    if (ss.assets.min() < 0.0)
        throw std::invalid_argument("make_state_space: asset grid must be non-negative");
    return ss;
}

} // namespace spalab
