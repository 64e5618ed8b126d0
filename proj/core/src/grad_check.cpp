#include "deer/grad_check.hpp"

#include <cmath>

#include "deer/ops.hpp"

namespace deer {

template <typename T>
double grad_check_fn(const std::function<Tensor<T>(const std::vector<Tensor<T>>&)>& build,
                     std::vector<Tensor<T>>& inputs, T fd_step) {
    // analytic pass
    Tape<T> tape;
    std::vector<T> analytic;
    {
        typename Tape<T>::Scope scope(tape);
        for (auto& in : inputs) {
            in.set_requires_grad(true);
            in.zero_grad();
        }
        Tensor<T> loss = build(inputs);
        tape.backward(loss);
        for (auto& in : inputs) {
            in.ensure_grad();
            analytic.insert(analytic.end(), in.grad_values().begin(), in.grad_values().end());
        }
    }

    // finite differences, no recording
    auto eval = [&]() -> double {
        typename Tape<T>::NoGrad off;
        return static_cast<double>(build(inputs).item());
    };
    std::vector<T> fd;
    fd.reserve(analytic.size());
    for (auto& in : inputs) {
        T* p = in.mutable_data();
        for (int64_t i = 0; i < in.numel(); ++i) {
            const T saved = p[i];
            p[i] = saved + fd_step;
            const double fp = eval();
            p[i] = saved - fd_step;
            const double fm = eval();
            p[i] = saved;
            fd.push_back(static_cast<T>((fp - fm) / (2.0 * static_cast<double>(fd_step))));
        }
    }

    double diff2 = 0.0, ref2 = 0.0;
    for (size_t i = 0; i < fd.size(); ++i) {
        const double d = static_cast<double>(analytic[i]) - static_cast<double>(fd[i]);
        diff2 += d * d;
        ref2 += static_cast<double>(fd[i]) * static_cast<double>(fd[i]);
    }
    return std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-12);
}

template double grad_check_fn<float>(
    const std::function<Tensor<float>(const std::vector<Tensor<float>>&)>&,
    std::vector<Tensor<float>>&, float);
template double grad_check_fn<double>(
    const std::function<Tensor<double>(const std::vector<Tensor<double>>&)>&,
    std::vector<Tensor<double>>&, double);

namespace {

using D = double;
using Td = Tensor<double>;
namespace op = deer::ops;

Td rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Td t = Td::zeros(std::move(shape));
    double* p = t.mutable_data();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = rng.uniform(lo, hi);
    return t;
}

// Keep samples away from relu/abs kinks: the finite-difference probe
// itself moves by the step, so the margin must exceed it.
Td rand_tensor_kink_safe(Rng& rng, Shape shape, double margin = 1e-4) {
    Td t = rand_tensor(rng, std::move(shape));
    double* p = t.mutable_data();
    for (int64_t i = 0; i < t.numel(); ++i)
        while (std::fabs(p[i]) < margin) p[i] = rng.uniform(-1.0, 1.0);
    return t;
}

// random fixed coefficients so the probed gradient is non-uniform
Td coeffs(Rng& rng, const Shape& shape) { return rand_tensor(rng, shape); }

Td weigh(const Td& x, const Td& c) { return op::sum(op::mul(x, c)); }

struct OpCase {
    std::string name;
    std::function<double(Rng&)> run_trial;  // returns one trial's rel err
};

double run_case(const std::function<Td(const std::vector<Td>&)>& build, std::vector<Td> inputs) {
    return grad_check_fn<double>(build, inputs, 1e-5);
}

std::vector<OpCase> certification_cases() {
    std::vector<OpCase> cases;

    cases.push_back({"identity", [](Rng&) {
        // exact case: zero inputs make the finite difference exact, so
        // the reported error must be exactly 0
        std::vector<Td> ins = {Td::zeros({16})};
        return run_case([](const std::vector<Td>& v) { return op::sum(op::reshape(v[0], {4, 4})); },
                        ins);
    }});

    cases.push_back({"add", [](Rng& rng) {
        Td c = coeffs(rng, {24});
        std::vector<Td> ins = {rand_tensor(rng, {24}), rand_tensor(rng, {24})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::add(v[0], v[1]), c); }, ins);
    }});

    cases.push_back({"multiply", [](Rng& rng) {
        Td c = coeffs(rng, {24});
        std::vector<Td> ins = {rand_tensor(rng, {24}), rand_tensor(rng, {24})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::mul(v[0], v[1]), c); }, ins);
    }});

    cases.push_back({"div", [](Rng& rng) {
        Td c = coeffs(rng, {24});
        std::vector<Td> ins = {rand_tensor(rng, {24}), rand_tensor(rng, {24}, 0.5, 1.5)};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::div(v[0], v[1]), c); }, ins);
    }});

    cases.push_back({"relu", [](Rng& rng) {
        Td c = coeffs(rng, {64});
        std::vector<Td> ins = {rand_tensor_kink_safe(rng, {64})};
        return run_case([c](const std::vector<Td>& v) { return weigh(op::relu(v[0]), c); }, ins);
    }});

    cases.push_back({"leaky-relu", [](Rng& rng) {
        Td c = coeffs(rng, {64});
        std::vector<Td> ins = {rand_tensor_kink_safe(rng, {64})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::leaky_relu(v[0], 0.2), c); }, ins);
    }});

    cases.push_back({"abs", [](Rng& rng) {
        Td c = coeffs(rng, {64});
        std::vector<Td> ins = {rand_tensor_kink_safe(rng, {64})};
        return run_case([c](const std::vector<Td>& v) { return weigh(op::abs(v[0]), c); }, ins);
    }});

    cases.push_back({"sum", [](Rng& rng) {
        std::vector<Td> ins = {rand_tensor(rng, {32})};
        return run_case(
            [](const std::vector<Td>& v) { return op::scale(op::sum(v[0]), 1.7); }, ins);
    }});

    cases.push_back({"mean", [](Rng& rng) {
        std::vector<Td> ins = {rand_tensor(rng, {32})};
        return run_case(
            [](const std::vector<Td>& v) { return op::scale(op::mean(v[0]), 2.3); }, ins);
    }});

    cases.push_back({"concat", [](Rng& rng) {
        Td c = coeffs(rng, {1, 4, 4, 5});
        std::vector<Td> ins = {rand_tensor(rng, {1, 4, 4, 2}), rand_tensor(rng, {1, 4, 4, 3})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::concat_ch(v[0], v[1]), c); }, ins);
    }});

    cases.push_back({"point-wise-linear", [](Rng& rng) {
        Td c = coeffs(rng, {2, 4});
        std::vector<Td> ins = {rand_tensor(rng, {2, 5}), rand_tensor(rng, {5, 4}),
                               rand_tensor(rng, {4})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::linear(v[0], v[1], v[2]), c); },
            ins);
    }});

    cases.push_back({"line-spread", [](Rng& rng) {
        Td c = coeffs(rng, {2, 8, 6, 1});
        std::vector<Td> ins = {rand_tensor(rng, {6, 8}), rand_tensor(rng, {2, 6})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::line_spread(v[0], v[1], 8), c); },
            ins);
    }});

    cases.push_back({"line-spread-shared", [](Rng& rng) {
        Td c = coeffs(rng, {2, 8, 6, 1});
        std::vector<Td> ins = {rand_tensor(rng, {8}), rand_tensor(rng, {2, 6})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::line_spread(v[0], v[1], 8), c); },
            ins);
    }});

    cases.push_back({"conv2d", [](Rng& rng) {
        Td c = coeffs(rng, {1, 8, 8, 2});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 3}), rand_tensor(rng, {5, 5, 3, 2}),
                               rand_tensor(rng, {2})};
        return run_case(
            [c](const std::vector<Td>& v) {
                return weigh(op::conv2d(v[0], v[1], v[2], 1, op::Padding::Same), c);
            },
            ins);
    }});

    cases.push_back({"conv2d-stride2", [](Rng& rng) {
        Td c = coeffs(rng, {1, 4, 4, 2});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 2}), rand_tensor(rng, {3, 3, 2, 2}),
                               rand_tensor(rng, {2})};
        return run_case(
            [c](const std::vector<Td>& v) {
                return weigh(op::conv2d(v[0], v[1], v[2], 2, op::Padding::Same), c);
            },
            ins);
    }});

    cases.push_back({"conv2d-valid", [](Rng& rng) {
        Td c = coeffs(rng, {1, 4, 4, 2});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 3}), rand_tensor(rng, {5, 5, 3, 2}),
                               rand_tensor(rng, {2})};
        return run_case(
            [c](const std::vector<Td>& v) {
                return weigh(op::conv2d(v[0], v[1], v[2], 1, op::Padding::Valid), c);
            },
            ins);
    }});

    cases.push_back({"transpose-conv", [](Rng& rng) {
        Td c = coeffs(rng, {1, 8, 8, 3});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 2}), rand_tensor(rng, {5, 5, 3, 2}),
                               rand_tensor(rng, {3})};
        return run_case(
            [c](const std::vector<Td>& v) {
                return weigh(op::conv2d_transpose(v[0], v[1], v[2], op::Padding::Same), c);
            },
            ins);
    }});

    cases.push_back({"transpose-conv-valid", [](Rng& rng) {
        Td c = coeffs(rng, {1, 12, 12, 3});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 2}), rand_tensor(rng, {5, 5, 3, 2}),
                               rand_tensor(rng, {3})};
        return run_case(
            [c](const std::vector<Td>& v) {
                return weigh(op::conv2d_transpose(v[0], v[1], v[2], op::Padding::Valid), c);
            },
            ins);
    }});

    cases.push_back({"bilinear-rotate", [](Rng& rng) {
        Td c = coeffs(rng, {8, 8});
        std::vector<Td> ins = {rand_tensor(rng, {8, 8})};
        const double angle = M_PI / 6.0;
        return run_case(
            [c, angle](const std::vector<Td>& v) {
                return weigh(op::rotate_bilinear(v[0], angle), c);
            },
            ins);
    }});

    cases.push_back({"fourier-filter", [](Rng& rng) {
        FilterKernel k = FilterKernel::make(FilterKind::SheppLogan, 16, 1.0);
        Td c = coeffs(rng, {3, 16});
        std::vector<Td> ins = {rand_tensor(rng, {3, 16})};
        return run_case(
            [c, k](const std::vector<Td>& v) { return weigh(op::fourier_filter(v[0], k), c); },
            ins);
    }});

    cases.push_back({"fov-mask", [](Rng& rng) {
        Td c = coeffs(rng, {8, 8});
        std::vector<Td> ins = {rand_tensor(rng, {8, 8})};
        return run_case(
            [c](const std::vector<Td>& v) { return weigh(op::fov_mask(v[0]), c); }, ins);
    }});

    cases.push_back({"composite", [](Rng& rng) {
        // conv -> leaky-relu -> rotate -> filtered row mix, the op chain a
        // training step exercises
        FilterKernel k = FilterKernel::make(FilterKind::SheppLogan, 8, 1.0);
        Td c = coeffs(rng, {1, 8, 8, 1});
        std::vector<Td> ins = {rand_tensor(rng, {1, 8, 8, 1}), rand_tensor(rng, {3, 3, 1, 1}),
                               rand_tensor(rng, {8, 8})};
        return run_case(
            [c, k](const std::vector<Td>& v) {
                Td y = op::conv2d(v[0], v[1], 1, op::Padding::Same);
                y = op::leaky_relu(y, 0.2);
                y = op::mul(y, op::reshape(op::rotate_bilinear(v[2], 0.4), {1, 8, 8, 1}));
                Td rows = op::reshape(y, {8, 8});
                return op::add(weigh(op::reshape(op::fourier_filter(rows, k), {1, 8, 8, 1}), c),
                               op::mean(y));
            },
            ins);
    }});

    return cases;
}

}  // namespace

std::vector<GradCheckResult> run_grad_certification(int trials, uint64_t seed) {
    check(trials >= 1, "grad_check: trials must be >= 1");
    std::vector<GradCheckResult> results;
    for (auto& c : certification_cases()) {
        GradCheckResult r{c.name, 0.0, trials};
        for (int t = 0; t < trials; ++t) {
            Rng rng(seed_stream(seed + static_cast<uint64_t>(t), "gradcheck-" + c.name));
            r.max_rel_err = std::max(r.max_rel_err, c.run_trial(rng));
        }
        results.push_back(r);
    }
    return results;
}

double grad_check_named(const std::string& op, int trials, uint64_t seed) {
    for (auto& c : certification_cases()) {
        if (c.name != op) continue;
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            Rng rng(seed_stream(seed + static_cast<uint64_t>(t), "gradcheck-" + op));
            worst = std::max(worst, c.run_trial(rng));
        }
        return worst;
    }
    throw std::invalid_argument("grad_check: unknown operator '" + op + "'");
}

}  // namespace deer
