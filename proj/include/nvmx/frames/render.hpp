#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/camera.hpp>
#include <nvmx/core/frames.hpp>
#include <nvmx/core/rng.hpp>
#include <nvmx/core/site.hpp>
#include <nvmx/frames/psf.hpp>

namespace nvmx {

namespace render_detail {

// stream tags, chosen once and fixed so files rendered by older builds replay
constexpr std::uint64_t kSiteTag = 0x736974u;
constexpr std::uint64_t kPixelTag = 0x706978u;

} // namespace render_detail

// Renders one EMCCD exposure into the given frame of the stack.
//
// Physics chain per site: photon number ~ Poisson(mean), each photon lands at
// the site position plus Gaussian PSF scatter and is binned (photons falling
// off the sensor are lost). Per pixel: the accumulated photoelectrons pass
// the EM register, modeled as Gamma(shape = n_electrons, scale = em_gain),
// then bias and Gaussian read noise are added and the result clips to the
// 16-bit range.
//
// Randomness comes from child streams keyed by (site id, frame) for photons
// and (pixel index, frame) for the camera, so the output is independent of
// site iteration order and identical whether frames are rendered serially or
// farmed out.
inline void render_frame(FrameStack& stack, std::uint32_t frame_idx,
                         const std::vector<NVSite>& sites,
                         const std::vector<double>& photon_means, const PSFModel& psf,
                         const CameraModel& camera, const RngStream& base) {
    psf.validate();
    camera.validate();
    if (sites.size() != photon_means.size())
        throw std::invalid_argument("render_frame: one photon mean per site required");
    if (frame_idx >= stack.n_frames) throw std::invalid_argument("render_frame: frame index out of range");
    const auto w = static_cast<double>(stack.width);
    const auto h = static_cast<double>(stack.height);

    std::vector<std::uint32_t> electrons(stack.frame_size(), 0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const NVSite& site = sites[i];
        if (site.x < 0.0 || site.x >= w || site.y < 0.0 || site.y >= h)
            throw std::invalid_argument("render_frame: site outside the frame");
        if (photon_means[i] < 0.0)
            throw std::invalid_argument("render_frame: photon mean must be >= 0");

        RngStream rng = base.child(render_detail::kSiteTag, static_cast<std::uint64_t>(site.id),
                                   frame_idx);
        std::uint64_t n = rng.poisson(photon_means[i]);
        for (std::uint64_t k = 0; k < n; ++k) {
            double px = site.x + psf.sigma_px * rng.normal();
            double py = site.y + psf.sigma_px * rng.normal();
            auto ix = static_cast<long>(std::floor(px + 0.5));
            auto iy = static_cast<long>(std::floor(py + 0.5));
            if (ix < 0 || iy < 0 || ix >= static_cast<long>(stack.width) ||
                iy >= static_cast<long>(stack.height))
                continue;
            ++electrons[static_cast<std::size_t>(iy) * stack.width +
                        static_cast<std::size_t>(ix)];
        }
    }

    std::uint16_t* out = stack.frame(frame_idx);
    for (std::size_t p = 0; p < electrons.size(); ++p) {
        RngStream rng = base.child(render_detail::kPixelTag, p, frame_idx);
        double adu = camera.bias_adu + camera.read_noise_adu * rng.normal();
        if (electrons[p] > 0)
            adu += rng.gamma(static_cast<double>(electrons[p]), camera.em_gain);
        double clipped = std::floor(adu + 0.5);
        if (clipped < 0.0) clipped = 0.0;
        if (clipped > 65535.0) clipped = 65535.0;
        out[p] = static_cast<std::uint16_t>(clipped);
    }
}

// Convenience wrapper rendering every frame of a stack with the same scene.
inline void render_stack(FrameStack& stack, const std::vector<NVSite>& sites,
                         const std::vector<double>& photon_means, const PSFModel& psf,
                         const CameraModel& camera, const RngStream& base) {
    for (std::uint32_t f = 0; f < stack.n_frames; ++f)
        render_frame(stack, f, sites, photon_means, psf, camera, base);
}

} // namespace nvmx
