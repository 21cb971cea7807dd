#pragma once

#include "relight/geometry/geometry.hpp"
#include "relight/raster/image.hpp"
#include "relight/scene/scene.hpp"

namespace relight::scene {

/// One light of one viewpoint, rendered by the analytic ray tracer.
struct RenderedSample {
  ColorImage color;
  DepthMap depth;          // exact camera-space z (rounded through float)
  ShadowImage shadow;      // visibility x clamped cosine, white Lambertian
  geometry::NormalMap normals;  // exact camera-space normals
  Raster<float> visibility;     // 1 lit / 0 occluded, 1 channel
  Raster<float> cosine;         // max(0, <N, l>)
  Raster<float> hit;            // 1 geometry / 0 sky
  LightDirection light;         // camera space
};

/// Nearest hit per pixel center, exact shadow rays toward the sun. Pixels
/// without a hit get sky color, far depth and zero shadow.
RenderedSample render(const SceneSpec& spec, int light_index);

/// Drops primitives that no primary ray through a pixel center touches.
/// Ground planes are always kept.
SceneSpec cull_offscreen(const SceneSpec& spec);

/// True when some primary ray through a pixel center intersects `prim`.
bool covers_pixels(const SceneSpec& spec, const Primitive& prim);

}  // namespace relight::scene
