#include "spalab/solution_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "spalab/errors.hpp"

namespace spalab {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'L', 'S', 'O', 'L', '\n'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxCount = 1ull << 33; // caps corrupt length fields

struct Writer {
    std::ofstream out;
    std::string path;

    explicit Writer(const std::string& p) : out(p, std::ios::binary), path(p) {
        if (!out) throw ArtifactError("cannot write '" + p + "'");
    }
    void bytes(const void* data, size_t n) {
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void i32(std::int32_t v) { bytes(&v, 4); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    template <class T>
    void vec(const std::vector<T>& v) {
        u64(v.size());
        bytes(v.data(), v.size() * sizeof(T));
    }
    void finish() {
        out.flush();
        if (!out) throw ArtifactError("write failed for '" + path + "'");
    }
};

struct Reader {
    std::ifstream in;
    std::string path;

    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw ArtifactError("missing solution file '" + p + "'");
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ArtifactError("solution file '" + path + "': " + what);
    }
    void bytes(void* data, size_t n) {
        in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in.gcount()) != n) fail("truncated");
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::int32_t i32() { std::int32_t v; bytes(&v, 4); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    std::uint64_t count() {
        std::uint64_t n = u64();
        if (n > kMaxCount) fail("implausible length field");
        return n;
    }
    std::string str() {
        std::string s(count(), '\0');
        bytes(s.data(), s.size());
        return s;
    }
    template <class T>
    std::vector<T> vec() {
        std::vector<T> v(count());
        bytes(v.data(), v.size() * sizeof(T));
        return v;
    }
};

void write_params(Writer& w, const ModelParams& p) {
    w.f64(p.gamma);
    w.f64(p.nu);
    w.f64(p.beta);
    w.f64(p.theta);
    w.f64(p.bequestShift);
    w.f64(p.lambda);
    w.f64(p.r);
    w.f64(p.workHours);
    w.f64(p.benefit);
    w.f64(p.statePension);
    w.f64(p.spouseIncome);
    w.f64(p.pSpaStep);
    w.i32(p.spaInit);
    w.i32(p.spaCap);
    w.i32(p.ageStart);
    w.i32(p.ageWorkEnd);
    w.i32(p.ageDeath);
    w.i32(p.ageSpouseRetire);
    w.i32(p.ageEntry);
    w.i32(p.spouseAgeOffset);
    w.i32(p.aimeFreezeAge);
    w.f64(p.db.db1);
    w.f64(p.db.db2);
    w.i32(p.mortality.firstStochasticAge);
    w.i32(p.mortality.ageDeath);
    w.vec(p.mortality.survival);
    w.u64(p.types.size());
    for (const TypeProfile& t : p.types) {
        w.str(t.label);
        w.u8(t.hasDB ? 1 : 0);
        w.f64(t.delta0);
        w.f64(t.delta1);
        w.f64(t.delta2);
        w.f64(t.rho);
        w.f64(t.sigmaEps);
        w.f64(t.sigmaInit);
        w.vec(t.unempProb);
        w.f64(t.share);
    }
}

ModelParams read_params(Reader& r) {
    ModelParams p;
    p.gamma = r.f64();
    p.nu = r.f64();
    p.beta = r.f64();
    p.theta = r.f64();
    p.bequestShift = r.f64();
    p.lambda = r.f64();
    p.r = r.f64();
    p.workHours = r.f64();
    p.benefit = r.f64();
    p.statePension = r.f64();
    p.spouseIncome = r.f64();
    p.pSpaStep = r.f64();
    p.spaInit = r.i32();
    p.spaCap = r.i32();
    p.ageStart = r.i32();
    p.ageWorkEnd = r.i32();
    p.ageDeath = r.i32();
    p.ageSpouseRetire = r.i32();
    p.ageEntry = r.i32();
    p.spouseAgeOffset = r.i32();
    p.aimeFreezeAge = r.i32();
    p.db.db1 = r.f64();
    p.db.db2 = r.f64();
    p.mortality.firstStochasticAge = r.i32();
    p.mortality.ageDeath = r.i32();
    p.mortality.survival = r.vec<double>();
    std::uint64_t nTypes = r.count();
    p.types.resize(nTypes);
    for (TypeProfile& t : p.types) {
        t.label = r.str();
        t.hasDB = r.u8() != 0;
        t.delta0 = r.f64();
        t.delta1 = r.f64();
        t.delta2 = r.f64();
        t.rho = r.f64();
        t.sigmaEps = r.f64();
        t.sigmaInit = r.f64();
        t.unempProb = r.vec<double>();
        t.share = r.f64();
    }
    return p;
}

void write_grid_spec(Writer& w, const GridSpec& g) {
    w.i32(g.nAssets);
    w.f64(g.assetMin);
    w.f64(g.assetMax);
    w.f64(g.assetCurv);
    w.i32(g.nAime);
    w.f64(g.aimeMin);
    w.f64(g.aimeMax);
    w.f64(g.aimeCurv);
    w.i32(g.nIncome);
}

GridSpec read_grid_spec(Reader& r) {
    GridSpec g;
    g.nAssets = r.i32();
    g.assetMin = r.f64();
    g.assetMax = r.f64();
    g.assetCurv = r.f64();
    g.nAime = r.i32();
    g.aimeMin = r.f64();
    g.aimeMax = r.f64();
    g.aimeCurv = r.f64();
    g.nIncome = r.i32();
    return g;
}

} // namespace

void save_solution(const std::string& path, const Solution& sol,
                   std::uint64_t configHash) {
    Writer w(path);
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u8(sol.kind == SolveKind::RE ? 0 : 1);
    w.u64(configHash);
    write_params(w, sol.ss.params);

    GridSpec g;
    g.nAssets = sol.ss.nA();
    g.assetMin = sol.ss.assets.min();
    g.assetMax = sol.ss.assets.max();
    g.assetCurv = 0.0; // spacing below is authoritative
    g.nAime = sol.ss.nM();
    g.aimeMin = sol.ss.aime.min();
    g.aimeMax = sol.ss.aime.max();
    g.aimeCurv = 0.0;
    g.nIncome = sol.ss.nY();
    write_grid_spec(w, g);
    w.vec(sol.ss.assets.points);
    w.vec(sol.ss.aime.points);

    w.u64(sol.ages.size());
    for (const Solution::AgeSlab& s : sol.ages) {
        w.vec(s.value);
        w.vec(s.aPol);
        w.vec(s.lPol);
        w.vec(s.ec);
        w.vec(s.defaultRule);
        w.vec(s.infoFlow);
        w.vec(s.baResidual);
        w.vec(s.baIters);
        w.u8(s.hasBA ? 1 : 0);
    }
    w.finish();
}

SolutionArtifact load_solution(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) r.fail("not a solution file");
    if (r.u32() != kVersion) r.fail("unsupported format version");

    SolutionArtifact art;
    std::uint8_t kind = r.u8();
    if (kind > 1) r.fail("bad solution kind");
    art.sol.kind = kind == 0 ? SolveKind::RE : SolveKind::RI;
    art.configHash = r.u64();

    ModelParams params = read_params(r);
    GridSpec gs = read_grid_spec(r);
    std::vector<double> assetPoints = r.vec<double>();
    std::vector<double> aimePoints = r.vec<double>();

    StateSpace ss;
    ss.params = std::move(params);
    ss.assets.points = std::move(assetPoints);
    ss.aime.points = std::move(aimePoints);
    if (ss.assets.n() != gs.nAssets || ss.aime.n() != gs.nAime)
        r.fail("grid size mismatch");
    for (const TypeProfile& t : ss.params.types)
        ss.chains.push_back(discretize_ar1(t.rho, t.sigmaEps, t.sigmaInit, gs.nIncome));
    if (ss.chains.empty()) r.fail("no household types");
    art.sol.ss = std::move(ss);

    const StateSpace& s2 = art.sol.ss;
    std::uint64_t nAges = r.count();
    if (nAges != static_cast<std::uint64_t>(s2.n_ages())) r.fail("age range mismatch");
    const size_t cells = static_cast<size_t>(s2.nSlots()) * static_cast<size_t>(s2.nW());
    art.sol.ages.resize(nAges);
    for (Solution::AgeSlab& slab : art.sol.ages) {
        slab.value = r.vec<double>();
        slab.aPol = r.vec<std::int16_t>();
        slab.lPol = r.vec<std::int8_t>();
        slab.ec = r.vec<double>();
        slab.defaultRule = r.vec<double>();
        slab.infoFlow = r.vec<double>();
        slab.baResidual = r.vec<double>();
        slab.baIters = r.vec<std::int32_t>();
        slab.hasBA = r.u8() != 0;
        if (slab.value.size() != cells || slab.aPol.size() != cells ||
            slab.lPol.size() != cells)
            r.fail("slab size mismatch");
        if (slab.hasBA && (slab.defaultRule.size() !=
                               static_cast<size_t>(s2.nW()) * static_cast<size_t>(s2.nD()) ||
                           slab.infoFlow.size() != static_cast<size_t>(s2.nW()) ||
                           slab.baResidual.size() != static_cast<size_t>(s2.nW()) ||
                           slab.baIters.size() != static_cast<size_t>(s2.nW())))
            r.fail("attention slab size mismatch");
    }
    char extra;
    r.in.read(&extra, 1);
    if (r.in.gcount() != 0) r.fail("trailing bytes");
    return art;
}

} // namespace spalab
