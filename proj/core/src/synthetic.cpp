#include "roirank/synthetic.hpp"

#include <cmath>

#include "roirank/init.hpp"

namespace roirank {

void SyntheticSpec::validate() const {
    if (n_sites < 1) throw ConfigError("synthetic: need at least 1 site");
    if (subjects_per_site_per_class < 1) {
        throw ConfigError("synthetic: need at least 1 subject per site per class");
    }
    if (n_rois < 1) throw ConfigError("synthetic: need at least 1 ROI");
    if (time_len < 17) throw ConfigError("synthetic: time_len must be >= 17");
    if (effect_strength < 0) {
        throw ConfigError("synthetic: effect_strength must be non-negative");
    }
    for (std::size_t r : planted_rois) {
        if (r >= n_rois) {
            throw ConfigError("synthetic: planted ROI " + std::to_string(r) +
                              " outside atlas of size " + std::to_string(n_rois));
        }
    }
}

Manifest gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Manifest m;
    const std::size_t T = spec.time_len;
    constexpr int kSmoothRadius = 2;

    for (std::size_t s = 0; s < spec.n_sites; ++s) {
        // Site-level acquisition shift, fixed for all subjects of the site.
        Rng site_rng(mix_seed(spec.seed, "site/" + std::to_string(s)));
        const double amp = 1.0 + spec.site_shift_scale * site_rng.uniform(-1.0, 1.0);
        const double offset = spec.site_shift_scale * site_rng.uniform(-1.0, 1.0);
        const std::string site_name = "SITE" + std::to_string(s);

        for (int cls = 0; cls < 2; ++cls) {
            const ClassLabel label = cls == 0 ? ClassLabel::ADHD : ClassLabel::HC;
            for (std::size_t i = 0; i < spec.subjects_per_site_per_class; ++i) {
                SubjectRecord rec;
                rec.site = site_name;
                rec.label = label;
                rec.subject_id = site_name + "_" + label_name(label) + "_" +
                                 std::to_string(i);
                Rng rng(mix_seed(spec.seed, rec.subject_id));
                Tensor series({spec.n_rois, T});
                std::vector<double> noise(T + 2 * kSmoothRadius);
                for (std::size_t r = 0; r < spec.n_rois; ++r) {
                    for (double& v : noise) v = rng.normal();
                    const bool planted =
                        label == ClassLabel::ADHD && spec.planted_rois.count(r) > 0;
                    const double freq = 3.0 + static_cast<double>(r % 5);
                    const double phase = rng.uniform(0.0, 2.0 * M_PI);
                    for (std::size_t t = 0; t < T; ++t) {
                        double v = 0;
                        for (int k = -kSmoothRadius; k <= kSmoothRadius; ++k) {
                            v += noise[t + kSmoothRadius + k];
                        }
                        v /= 2.0 * kSmoothRadius + 1.0;
                        if (planted) {
                            v += spec.effect_strength *
                                 std::sin(2.0 * M_PI * freq *
                                              static_cast<double>(t) /
                                              static_cast<double>(T) +
                                          phase);
                        }
                        series.at2(r, t) = amp * v + offset;
                    }
                }
                rec.series = std::move(series);
                m.records.push_back(std::move(rec));
            }
        }
    }
    return m;
}

}  // namespace roirank
