#pragma once

// Symbolic basis dictionaries and the flat coefficient layout shared by the
// assembly, regression and reconstruction stages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wcr {

enum class BasisKind : std::uint8_t {
    Monomial,   // prod x_i^{e_i}; exponents all zero encodes the constant 1
    Sin,
    Cos,
    Sin3,
    Cos3,
    AbsPowAlpha  // |x_axis|^alpha, alpha supplied by the dictionary
};

struct BasisElement {
    BasisKind kind = BasisKind::Monomial;
    std::vector<int> exponents;  // Monomial only
    int axis = 0;                // all other kinds

    static BasisElement monomial(std::vector<int> e) {
        for (int v : e)
            if (v < 0) throw std::invalid_argument("BasisElement: negative exponent");
        BasisElement b;
        b.kind = BasisKind::Monomial;
        b.exponents = std::move(e);
        return b;
    }
    static BasisElement one(int dim) { return monomial(std::vector<int>(dim, 0)); }
    static BasisElement trig(BasisKind k, int axis) {
        BasisElement b;
        b.kind = k;
        b.axis = axis;
        return b;
    }
    static BasisElement abs_pow_alpha(int axis) {
        BasisElement b;
        b.kind = BasisKind::AbsPowAlpha;
        b.axis = axis;
        return b;
    }

    bool operator==(const BasisElement& o) const {
        return kind == o.kind && exponents == o.exponents &&
               (kind == BasisKind::Monomial || axis == o.axis);
    }

    int degree() const {
        int s = 0;
        for (int v : exponents) s += v;
        return s;
    }

    std::string name() const {
        switch (kind) {
            case BasisKind::Monomial: {
                std::ostringstream os;
                bool any = false;
                for (std::size_t i = 0; i < exponents.size(); ++i) {
                    if (exponents[i] == 0) continue;
                    if (any) os << "*";
                    os << "x" << (i + 1);
                    if (exponents[i] > 1) os << "^" << exponents[i];
                    any = true;
                }
                return any ? os.str() : "1";
            }
            case BasisKind::Sin: return "sin(x" + std::to_string(axis + 1) + ")";
            case BasisKind::Cos: return "cos(x" + std::to_string(axis + 1) + ")";
            case BasisKind::Sin3: return "sin^3(x" + std::to_string(axis + 1) + ")";
            case BasisKind::Cos3: return "cos^3(x" + std::to_string(axis + 1) + ")";
            case BasisKind::AbsPowAlpha: return "|x" + std::to_string(axis + 1) + "|^a";
        }
        return "?";
    }
};

class BasisDictionary {
  public:
    BasisDictionary() = default;
    BasisDictionary(int dim, std::vector<BasisElement> elems,
                    std::optional<double> alpha = std::nullopt)
        : dim_(dim), elements_(std::move(elems)), alpha_(alpha) {
        if (dim_ < 1) throw std::invalid_argument("BasisDictionary: dim >= 1");
        if (elements_.empty())
            throw std::invalid_argument("BasisDictionary: empty element list");
        for (const auto& e : elements_) {
            if (e.kind == BasisKind::Monomial) {
                if (static_cast<int>(e.exponents.size()) != dim_)
                    throw std::invalid_argument("BasisDictionary: exponent length != dim");
            } else if (e.axis < 0 || e.axis >= dim_) {
                throw std::invalid_argument("BasisDictionary: axis out of range");
            }
        }
        for (std::size_t i = 0; i < elements_.size(); ++i)
            for (std::size_t j = i + 1; j < elements_.size(); ++j)
                if (elements_[i] == elements_[j])
                    throw std::invalid_argument("BasisDictionary: duplicate element");
    }

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(elements_.size()); }
    const std::vector<BasisElement>& elements() const { return elements_; }
    std::optional<double> alpha() const { return alpha_; }

    bool has_abs_pow() const {
        return std::any_of(elements_.begin(), elements_.end(), [](const auto& e) {
            return e.kind == BasisKind::AbsPowAlpha;
        });
    }

    double eval_element(const BasisElement& e, const Eigen::VectorXd& x) const {
        switch (e.kind) {
            case BasisKind::Monomial: {
                double v = 1.0;
                for (int i = 0; i < dim_; ++i)
                    for (int p = 0; p < e.exponents[i]; ++p) v *= x[i];
                return v;
            }
            case BasisKind::Sin: return std::sin(x[e.axis]);
            case BasisKind::Cos: return std::cos(x[e.axis]);
            case BasisKind::Sin3: {
                double s = std::sin(x[e.axis]);
                return s * s * s;
            }
            case BasisKind::Cos3: {
                double c = std::cos(x[e.axis]);
                return c * c * c;
            }
            case BasisKind::AbsPowAlpha: {
                if (!alpha_)
                    throw std::logic_error("BasisDictionary: abs_pow_alpha needs alpha");
                return std::pow(std::abs(x[e.axis]), *alpha_);
            }
        }
        return 0.0;
    }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
        if (!x.allFinite())
            throw std::invalid_argument("BasisDictionary::eval: non-finite input");
        Eigen::VectorXd out(size());
        for (int j = 0; j < size(); ++j) out[j] = eval_element(elements_[j], x);
        return out;
    }

    // b x N matrix of basis values for the rows of a sample block.
    Eigen::MatrixXd eval_block(const Eigen::MatrixXd& samples) const {
        Eigen::MatrixXd out(size(), samples.rows());
        Eigen::VectorXd x(dim_);
        for (Eigen::Index k = 0; k < samples.rows(); ++k) {
            x = samples.row(k).transpose();
            for (int j = 0; j < size(); ++j) out(j, k) = eval_element(elements_[j], x);
        }
        return out;
    }

  private:
    int dim_ = 1;
    std::vector<BasisElement> elements_;
    std::optional<double> alpha_;
};

inline long long binomial(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Full polynomial dictionary up to degree p, graded-lexicographic order
// (degree ascending, lexicographic in exponents within a degree).
inline BasisDictionary full_poly_basis(int d, int p, long long cap = 10000) {
    if (d < 1 || p < 0) throw std::invalid_argument("full_poly_basis: d >= 1, p >= 0");
    if (binomial(p + d, p) > cap)
        throw std::invalid_argument("full_poly_basis: dictionary size exceeds cap");
    std::vector<BasisElement> elems;
    std::vector<int> e(d, 0);
    for (int deg = 0; deg <= p; ++deg) {
        // enumerate compositions of deg into d parts, lexicographic
        std::fill(e.begin(), e.end(), 0);
        e[0] = deg;
        while (true) {
            elems.push_back(BasisElement::monomial(e));
            // next composition: move one unit right of the last nonzero head
            int i = d - 2;
            while (i >= 0 && e[i] == 0) --i;
            if (i < 0) break;
            --e[i];
            int tail = e[d - 1] + 1;
            e[d - 1] = 0;
            e[i + 1] = tail;
            if (deg == 0) break;
        }
    }
    // lexicographic in exponents means descending power on x1 first, which
    // the composition enumeration above already produces; reverse within
    // each degree so x1 < x2 < ... ordering reads naturally.
    std::stable_sort(elems.begin(), elems.end(),
                     [](const BasisElement& a, const BasisElement& b) {
                         if (a.degree() != b.degree()) return a.degree() < b.degree();
                         return std::lexicographical_compare(
                             b.exponents.begin(), b.exponents.end(),
                             a.exponents.begin(), a.exponents.end());
                     });
    return BasisDictionary(d, std::move(elems));
}

inline BasisDictionary reduced_basis(int d, std::vector<BasisElement> elems,
                                     std::optional<double> alpha = std::nullopt) {
    return BasisDictionary(d, std::move(elems), alpha);
}

enum class DiffusionStructure { Full, Diagonal, ConstantDiagonal, None };
enum class LevyStructure { ConstantDiagonal, Functional1d };

// Flat coefficient layout: drift block (row-major over (dim, basis)), then
// diffusion block, then Levy block.
struct CoefficientLayout {
    int dim = 1;
    int drift_b = 0;
    int diffusion_b = 0;  // basis size backing the diffusion block (1 if constant)
    int levy_b = 0;       // basis size of the Levy block per entry (1 if constant)
    DiffusionStructure diffusion = DiffusionStructure::ConstantDiagonal;
    LevyStructure levy = LevyStructure::ConstantDiagonal;

    static CoefficientLayout make(int d, int drift_b, DiffusionStructure ds,
                                  int diffusion_b, LevyStructure ls, int levy_b) {
        if (ls == LevyStructure::Functional1d && d != 1)
            throw std::invalid_argument("CoefficientLayout: functional Levy needs d = 1");
        CoefficientLayout l;
        l.dim = d;
        l.drift_b = drift_b;
        l.diffusion = ds;
        l.diffusion_b = (ds == DiffusionStructure::ConstantDiagonal) ? 1
                        : (ds == DiffusionStructure::None)           ? 0
                                                                     : diffusion_b;
        l.levy = ls;
        l.levy_b = (ls == LevyStructure::ConstantDiagonal) ? 1 : levy_b;
        return l;
    }

    int drift_size() const { return dim * drift_b; }
    int diffusion_size() const {
        switch (diffusion) {
            case DiffusionStructure::Full: return dim * dim * diffusion_b;
            case DiffusionStructure::Diagonal: return dim * diffusion_b;
            case DiffusionStructure::ConstantDiagonal: return dim;
            case DiffusionStructure::None: return 0;
        }
        return 0;
    }
    int levy_size() const {
        return levy == LevyStructure::ConstantDiagonal ? dim : levy_b;
    }
    int total() const { return drift_size() + diffusion_size() + levy_size(); }

    int drift_index(int i, int j) const { return i * drift_b + j; }
    int diffusion_index(int i, int j, int s) const {
        int base = drift_size();
        switch (diffusion) {
            case DiffusionStructure::Full:
                return base + (i * dim + j) * diffusion_b + s;
            case DiffusionStructure::Diagonal:
                return base + i * diffusion_b + s;
            case DiffusionStructure::ConstantDiagonal:
                return base + i;
            case DiffusionStructure::None:
                throw std::logic_error("CoefficientLayout: no diffusion block");
        }
        return -1;
    }
    int levy_index(int i, int s = 0) const {
        int base = drift_size() + diffusion_size();
        return levy == LevyStructure::ConstantDiagonal ? base + i : base + s;
    }

    enum class Block { Drift, Diffusion, Levy };
    struct Entry {
        Block block;
        int i = 0, j = 0, s = 0;
    };
    Entry decode(int flat) const {
        if (flat < 0 || flat >= total())
            throw std::out_of_range("CoefficientLayout::decode");
        if (flat < drift_size())
            return {Block::Drift, flat / drift_b, flat % drift_b, 0};
        flat -= drift_size();
        if (flat < diffusion_size()) {
            switch (diffusion) {
                case DiffusionStructure::Full:
                    return {Block::Diffusion, flat / (dim * diffusion_b),
                            (flat / diffusion_b) % dim, flat % diffusion_b};
                case DiffusionStructure::Diagonal:
                    return {Block::Diffusion, flat / diffusion_b, flat / diffusion_b,
                            flat % diffusion_b};
                case DiffusionStructure::ConstantDiagonal:
                    return {Block::Diffusion, flat, flat, 0};
                case DiffusionStructure::None:
                    break;  // unreachable: diffusion_size() == 0
            }
        }
        flat -= diffusion_size();
        if (levy == LevyStructure::ConstantDiagonal)
            return {Block::Levy, flat, 0, 0};
        return {Block::Levy, 0, 0, flat};
    }
    int encode(const Entry& e) const {
        switch (e.block) {
            case Block::Drift: return drift_index(e.i, e.j);
            case Block::Diffusion: return diffusion_index(e.i, e.j, e.s);
            case Block::Levy: return levy_index(e.i, e.s);
        }
        return -1;
    }
};

}  // namespace wcr
