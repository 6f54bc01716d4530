#include "evtach/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <fftw3.h>

#include "evtach/errors.hpp"

namespace evtach {

namespace {

double l2_norm(const std::vector<std::int16_t>& cells) {
    std::int64_t sum = 0;
    for (const std::int16_t c : cells) {
        sum += static_cast<std::int64_t>(c) * c;
    }
    return std::sqrt(static_cast<double>(sum));
}

std::int64_t dot(const std::vector<std::int16_t>& a, const std::vector<std::int16_t>& b) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += static_cast<std::int64_t>(a[i]) * b[i];
    }
    return sum;
}

// Largest product sum over all 2D cyclic displacements of the frame.
std::int64_t max_cyclic_dot(const std::vector<std::int16_t>& t,
                            const std::vector<std::int16_t>& f, std::uint32_t side) {
    const std::size_t s = side;
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::size_t dy = 0; dy < s; ++dy) {
        for (std::size_t dx = 0; dx < s; ++dx) {
            std::int64_t sum = 0;
            for (std::size_t i = 0; i < s; ++i) {
                const std::int16_t* trow = t.data() + i * s;
                const std::int16_t* frow = f.data() + ((i + dy) % s) * s;
                const std::size_t split = s - dx;
                for (std::size_t j = 0; j < split; ++j) {
                    sum += static_cast<std::int64_t>(trow[j]) * frow[j + dx];
                }
                for (std::size_t j = split; j < s; ++j) {
                    sum += static_cast<std::int64_t>(trow[j]) * frow[j + dx - s];
                }
            }
            best = std::max(best, sum);
        }
    }
    return best;
}

CorrelationResponse correlate_direct(const Template& tpl, const FrameSequence& seq, CorrMode mode,
                                     CorrNorm norm) {
    CorrelationResponse resp{{}, mode, norm};
    resp.scores.reserve(seq.size());
    const double norm_t = l2_norm(tpl.frame.cells);
    for (const AggregationFrame& f : seq.frames) {
        const std::int64_t raw = mode == CorrMode::zero_shift
                                     ? dot(tpl.frame.cells, f.cells)
                                     : max_cyclic_dot(tpl.frame.cells, f.cells, f.side);
        if (norm == CorrNorm::raw) {
            resp.scores.push_back(static_cast<double>(raw));
            continue;
        }
        const double norm_f = l2_norm(f.cells);
        const double denom = norm_t * norm_f;
        resp.scores.push_back(denom == 0.0 ? 0.0 : static_cast<double>(raw) / denom);
    }
    return resp;
}

// RAII wrapper around the FFTW buffers and plans for one frame side. The
// cyclic correlation surface is IFFT(conj(FFT(template)) * FFT(frame)).
class CyclicCorrelator {
public:
    explicit CyclicCorrelator(std::uint32_t side)
        : n_real_(static_cast<std::size_t>(side) * side),
          n_complex_(static_cast<std::size_t>(side) * (side / 2 + 1)) {
        real_ = fftw_alloc_real(n_real_);
        spectrum_ = fftw_alloc_complex(n_complex_);
        template_spectrum_ = fftw_alloc_complex(n_complex_);
        cross_ = fftw_alloc_complex(n_complex_);
        surface_ = fftw_alloc_real(n_real_);
        const int n = static_cast<int>(side);
        forward_ = fftw_plan_dft_r2c_2d(n, n, real_, spectrum_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_2d(n, n, cross_, surface_, FFTW_ESTIMATE);
    }

    ~CyclicCorrelator() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(real_);
        fftw_free(spectrum_);
        fftw_free(template_spectrum_);
        fftw_free(cross_);
        fftw_free(surface_);
    }

    CyclicCorrelator(const CyclicCorrelator&) = delete;
    CyclicCorrelator& operator=(const CyclicCorrelator&) = delete;

    void set_template(const std::vector<std::int16_t>& cells) {
        load(cells);
        fftw_execute(forward_);
        for (std::size_t i = 0; i < n_complex_; ++i) {
            template_spectrum_[i][0] = spectrum_[i][0];
            template_spectrum_[i][1] = spectrum_[i][1];
        }
    }

    // Returns the correlation surface value at zero displacement and the
    // maximum over all displacements, in one pass.
    void correlate(const std::vector<std::int16_t>& cells, double& at_zero, double& maximum) {
        load(cells);
        fftw_execute(forward_);
        for (std::size_t i = 0; i < n_complex_; ++i) {
            const double tr = template_spectrum_[i][0];
            const double ti = template_spectrum_[i][1];
            const double fr = spectrum_[i][0];
            const double fi = spectrum_[i][1];
            cross_[i][0] = tr * fr + ti * fi; // conj(T) * F
            cross_[i][1] = tr * fi - ti * fr;
        }
        fftw_execute(inverse_);
        const double scale = 1.0 / static_cast<double>(n_real_);
        at_zero = surface_[0] * scale;
        double best = surface_[0];
        for (std::size_t i = 1; i < n_real_; ++i) {
            best = std::max(best, surface_[i]);
        }
        maximum = best * scale;
    }

private:
    void load(const std::vector<std::int16_t>& cells) {
        for (std::size_t i = 0; i < n_real_; ++i) {
            real_[i] = static_cast<double>(cells[i]);
        }
    }

    std::size_t n_real_;
    std::size_t n_complex_;
    double* real_;
    fftw_complex* spectrum_;
    fftw_complex* template_spectrum_;
    fftw_complex* cross_;
    double* surface_;
    fftw_plan forward_;
    fftw_plan inverse_;
};

CorrelationResponse correlate_transform(const Template& tpl, const FrameSequence& seq,
                                        CorrMode mode, CorrNorm norm) {
    CorrelationResponse resp{{}, mode, norm};
    resp.scores.reserve(seq.size());
    if (seq.empty()) {
        return resp;
    }

    CyclicCorrelator corr(tpl.frame.side);
    corr.set_template(tpl.frame.cells);
    const double norm_t = l2_norm(tpl.frame.cells);
    for (const AggregationFrame& f : seq.frames) {
        double at_zero = 0.0;
        double maximum = 0.0;
        corr.correlate(f.cells, at_zero, maximum);
        const double raw = mode == CorrMode::zero_shift ? at_zero : maximum;
        if (norm == CorrNorm::raw) {
            resp.scores.push_back(raw);
            continue;
        }
        const double norm_f = l2_norm(f.cells);
        const double denom = norm_t * norm_f;
        resp.scores.push_back(denom == 0.0 ? 0.0 : raw / denom);
    }
    return resp;
}

} // namespace

CorrelationResponse correlate(const Template& tpl, const FrameSequence& seq, CorrMode mode,
                              CorrNorm norm, CorrBackend backend) {
    for (const AggregationFrame& f : seq.frames) {
        if (f.side != tpl.frame.side) {
            throw ConfigError("correlate: template side " + std::to_string(tpl.frame.side) +
                              " does not match frame side " + std::to_string(f.side));
        }
    }
    return backend == CorrBackend::direct ? correlate_direct(tpl, seq, mode, norm)
                                          : correlate_transform(tpl, seq, mode, norm);
}

} // namespace evtach
