#include "cra/geofence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cra/digest.hpp"
#include "cra/format.hpp"
#include "cra/simulate.hpp"  // worker_count

namespace cra {

namespace {

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Liang-Barsky clip of segment a-b against one rectangle. Counts only
/// passes through the interior; grazing an edge is not blockage.
bool segment_intersects_rect(const Vec2& a, const Vec2& b, const Rect& r) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double p, double q) {
        if (std::abs(p) < 1e-15) return q >= -1e-15;  // parallel to this boundary
        double t = q / p;
        if (p < 0.0) {
            if (t > t1) return false;
            if (t > t0) t0 = t;
        } else {
            if (t < t0) return false;
            if (t < t1) t1 = t;
        }
        return true;
    };
    if (!clip(-dx, a.x - r.xmin)) return false;
    if (!clip(dx, r.xmax - a.x)) return false;
    if (!clip(-dy, a.y - r.ymin)) return false;
    if (!clip(dy, r.ymax - a.y)) return false;
    if (!(t1 - t0 > 1e-12)) return false;
    double tm = 0.5 * (t0 + t1);
    double mx = a.x + tm * dx, my = a.y + tm * dy;
    return mx > r.xmin && mx < r.xmax && my > r.ymin && my < r.ymax;
}

double path_loss_db(double d_m, double fc_ghz, bool blocked) {
    if (blocked) return 22.7 + 36.7 * std::log10(d_m) + 26.0 * std::log10(fc_ghz);
    return 22.0 + 28.0 * std::log10(d_m) + 20.0 * std::log10(fc_ghz);
}

double success_from(const Scene& s, double d_m, bool blocked) {
    double mean_snr_db = s.link_budget_db - path_loss_db(d_m, s.carrier_ghz, blocked);
    double mean_snr = std::pow(10.0, mean_snr_db / 10.0);
    double p = std::exp(-s.snr_threshold / mean_snr);
    return std::clamp(p, kSuccessFloor, kSuccessCeil);
}

void validate_scene(const Scene& s) {
    if (s.grid.nx < 2 || s.grid.ny < 2)
        throw std::runtime_error("scene: grid needs at least 2x2 cells");
    if (!(s.grid.xmax > s.grid.xmin) || !(s.grid.ymax > s.grid.ymin))
        throw std::runtime_error("scene: grid extent is empty");
    if (!(s.carrier_ghz > 0.0)) throw std::runtime_error("scene: carrier frequency must be > 0");
    if (!(s.snr_threshold > 0.0)) throw std::runtime_error("scene: snr threshold must be > 0");
    if (!std::isfinite(s.link_budget_db)) throw std::runtime_error("scene: link budget not finite");
    for (const Rect& r : s.obstacles)
        if (!(r.xmax > r.xmin) || !(r.ymax > r.ymin))
            throw std::runtime_error("scene: degenerate obstacle rectangle");
    if (s.bob_ps_override && (!(*s.bob_ps_override > 0.0) || !(*s.bob_ps_override < 1.0)))
        throw std::runtime_error("scene: bob_ps_override must lie in (0,1)");
}

}  // namespace

Scene demo_scene(int nx, int ny) {
    Scene s;
    s.tx = {0.0, 0.0};
    s.bob = {60.0, 0.0};
    s.obstacles = {{-80.0, 30.0, -20.0, 70.0},
                   {20.0, 30.0, 80.0, 70.0},
                   {-80.0, -70.0, -20.0, -30.0},
                   {20.0, -70.0, 80.0, -30.0}};
    s.grid = {-150.0, -150.0, 150.0, 150.0, nx, ny};
    s.carrier_ghz = 3.5;
    s.snr_threshold = 1.0;
    s.link_budget_db = 89.184;
    return s;
}

Scene parse_scene(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("scene: invalid JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) throw std::runtime_error("document is not an object");
        if (j.value("schema", "") != kSceneSchema)
            throw std::runtime_error(std::string("unsupported schema, expected ") + kSceneSchema);
        Scene s;
        auto read_vec = [](const nlohmann::json& v) -> Vec2 {
            if (!v.is_array() || v.size() != 2) throw std::runtime_error("position is not [x,y]");
            return {v[0].get<double>(), v[1].get<double>()};
        };
        s.tx = read_vec(j.at("tx"));
        s.bob = read_vec(j.at("bob"));
        s.obstacles.clear();
        for (const auto& o : j.value("obstacles", nlohmann::json::array())) {
            if (!o.is_array() || o.size() != 4)
                throw std::runtime_error("obstacle is not [xmin,ymin,xmax,ymax]");
            s.obstacles.push_back(
                {o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>()});
        }
        const auto& g = j.at("grid");
        s.grid = {g.at("xmin").get<double>(), g.at("ymin").get<double>(),
                  g.at("xmax").get<double>(), g.at("ymax").get<double>(),
                  g.at("nx").get<int>(),      g.at("ny").get<int>()};
        s.carrier_ghz = j.at("carrier_ghz").get<double>();
        s.snr_threshold = j.at("snr_threshold").get<double>();
        s.link_budget_db = j.at("link_budget_db").get<double>();
        if (j.contains("bob_ps_override") && !j.at("bob_ps_override").is_null())
            s.bob_ps_override = j.at("bob_ps_override").get<double>();
        validate_scene(s);
        return s;
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("scene: ") + e.what());
    }
}

std::string serialize_scene(const Scene& s) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(kSceneSchema);
    w.key("tx").begin_array().value(s.tx.x).value(s.tx.y).end_array();
    w.key("bob").begin_array().value(s.bob.x).value(s.bob.y).end_array();
    w.key("obstacles").begin_array();
    for (const Rect& r : s.obstacles)
        w.begin_array().value(r.xmin).value(r.ymin).value(r.xmax).value(r.ymax).end_array();
    w.end_array();
    w.key("grid").begin_object();
    w.key("xmin").value(s.grid.xmin);
    w.key("ymin").value(s.grid.ymin);
    w.key("xmax").value(s.grid.xmax);
    w.key("ymax").value(s.grid.ymax);
    w.key("nx").value(s.grid.nx);
    w.key("ny").value(s.grid.ny);
    w.end_object();
    w.key("carrier_ghz").value(s.carrier_ghz);
    w.key("snr_threshold").value(s.snr_threshold);
    w.key("link_budget_db").value(s.link_budget_db);
    w.key("bob_ps_override");
    if (s.bob_ps_override)
        w.value(*s.bob_ps_override);
    else
        w.value_null();
    w.end_object();
    return w.str();
}

std::uint64_t scene_digest(const Scene& s) { return fnv1a64(serialize_scene(s)); }

bool segment_blocked(const Vec2& a, const Vec2& b, const std::vector<Rect>& obstacles) {
    for (const Rect& r : obstacles)
        if (segment_intersects_rect(a, b, r)) return true;
    return false;
}

double path_loss(const Scene& scene, const Vec2& point) {
    double d = dist(scene.tx, point);
    if (d < 1e-9) throw std::domain_error("path_loss: singular at the transmitter");
    return path_loss_db(d, scene.carrier_ghz, segment_blocked(scene.tx, point, scene.obstacles));
}

double success_probability(const Scene& scene, const Vec2& point) {
    double d = dist(scene.tx, point);
    if (d < 1e-9) throw std::domain_error("success_probability: singular at the transmitter");
    return success_from(scene, d, segment_blocked(scene.tx, point, scene.obstacles));
}

GeofenceMaps build_maps(const Scene& scene, const SourceModel& src, Interval itv) {
    validate_scene(scene);
    const GridSpec& g = scene.grid;
    std::uint64_t digest = scene_digest(scene);

    double bob_ps = scene.bob_ps_override ? *scene.bob_ps_override
                                          : success_probability(scene, scene.bob);

    GeofenceMaps maps;
    for (SpatialMap* m : {&maps.eve_success, &maps.cra, &maps.p_alpha}) {
        m->grid = g;
        m->scene_hash = digest;
        m->units = "probability";
        m->values.assign(std::size_t(g.nx) * g.ny, 0.0);
    }
    maps.eve_success.quantity = "eve_success";
    maps.cra.quantity = "optimal_cra";
    maps.p_alpha.quantity = "optimal_p_alpha";

    double min_d = 0.5 * std::min(g.dx(), g.dy());
    std::size_t total = std::size_t(g.nx) * g.ny;
    std::atomic<long long> holes{0};
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (std::size_t c = next.fetch_add(64); c < total; c = next.fetch_add(64)) {
            std::size_t end = std::min(c + 64, total);
            for (std::size_t cell = c; cell < end; ++cell) {
                int ix = int(cell % std::size_t(g.nx));
                int iy = int(cell / std::size_t(g.nx));
                Vec2 p = g.center(ix, iy);
                double d = dist(scene.tx, p);
                if (d < 1e-9) d = min_d;  // cell sits on the transmitter
                bool blocked = segment_blocked(scene.tx, p, scene.obstacles);
                double pse = success_from(scene, d, blocked);
                maps.eve_success.values[cell] = pse;
                try {
                    OptimizerResult r = optimize(src, ChannelPair(bob_ps, pse), itv);
                    maps.cra.values[cell] = r.value;
                    maps.p_alpha.values[cell] = r.p_alpha_star;
                } catch (const std::exception&) {
                    maps.cra.values[cell] = std::numeric_limits<double>::quiet_NaN();
                    maps.p_alpha.values[cell] = std::numeric_limits<double>::quiet_NaN();
                    holes.fetch_add(1);
                }
            }
        }
    };

    int workers = std::clamp(worker_count(), 1, int(std::max<std::size_t>(total / 64, 1)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    maps.holes = holes.load();
    return maps;
}

namespace {

/// Node key inside the marching-squares lattice (node = cell center).
inline std::uint64_t edge_key(std::uint64_t u, std::uint64_t v) {
    return (std::min(u, v) << 32) | std::max(u, v);
}

}  // namespace

GeofenceContour extract_contour(const SpatialMap& map, double threshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw std::domain_error("extract_contour: threshold must lie in (0,1)");
    const GridSpec& g = map.grid;
    GeofenceContour out;
    out.threshold = threshold;
    out.nx = g.nx;
    out.ny = g.ny;
    out.inside_mask.assign(map.values.size(), 0);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        out.inside_mask[i] = map.values[i] < threshold ? 1 : 0;

    auto node = [&](int ix, int iy) { return std::uint64_t(iy) * g.nx + ix; };
    auto val = [&](int ix, int iy) { return map.at(ix, iy); };
    auto inside = [&](int ix, int iy) { return val(ix, iy) < threshold; };

    // One interpolated vertex per crossed lattice edge, shared by both cells.
    std::map<std::uint64_t, Vec2> verts;
    auto vertex_on = [&](int ax, int ay, int bx, int by) {
        std::uint64_t k = edge_key(node(ax, ay), node(bx, by));
        auto it = verts.find(k);
        if (it == verts.end()) {
            double fa = val(ax, ay), fb = val(bx, by);
            double t = (threshold - fa) / (fb - fa);
            t = std::clamp(t, 0.0, 1.0);
            Vec2 pa = g.center(ax, ay), pb = g.center(bx, by);
            verts.emplace(k, Vec2{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)});
        }
        return k;
    };

    std::vector<std::pair<std::uint64_t, std::uint64_t>> segs;
    for (int iy = 0; iy + 1 < g.ny; ++iy) {
        for (int ix = 0; ix + 1 < g.nx; ++ix) {
            int code = (inside(ix, iy) ? 1 : 0) | (inside(ix + 1, iy) ? 2 : 0) |
                       (inside(ix + 1, iy + 1) ? 4 : 0) | (inside(ix, iy + 1) ? 8 : 0);
            if (code == 0 || code == 15) continue;
            // Edge vertices on demand: bottom, right, top, left.
            auto eb = [&] { return vertex_on(ix, iy, ix + 1, iy); };
            auto er = [&] { return vertex_on(ix + 1, iy, ix + 1, iy + 1); };
            auto et = [&] { return vertex_on(ix, iy + 1, ix + 1, iy + 1); };
            auto el = [&] { return vertex_on(ix, iy, ix, iy + 1); };
            auto add = [&](std::uint64_t a, std::uint64_t b) { segs.emplace_back(a, b); };
            switch (code) {
                case 1: add(el(), eb()); break;
                case 2: add(eb(), er()); break;
                case 3: add(el(), er()); break;
                case 4: add(er(), et()); break;
                case 6: add(eb(), et()); break;
                case 7: add(el(), et()); break;
                case 8: add(et(), el()); break;
                case 9: add(eb(), et()); break;
                case 11: add(er(), et()); break;
                case 12: add(el(), er()); break;
                case 13: add(eb(), er()); break;
                case 14: add(el(), eb()); break;
                case 5: {  // corners (0,0) and (1,1) inside
                    double avg = 0.25 * (val(ix, iy) + val(ix + 1, iy) + val(ix + 1, iy + 1) +
                                         val(ix, iy + 1));
                    if (avg < threshold) {  // center joins the two inside corners
                        add(eb(), er());
                        add(et(), el());
                    } else {
                        add(el(), eb());
                        add(er(), et());
                    }
                    break;
                }
                case 10: {  // corners (1,0) and (0,1) inside
                    double avg = 0.25 * (val(ix, iy) + val(ix + 1, iy) + val(ix + 1, iy + 1) +
                                         val(ix, iy + 1));
                    if (avg < threshold) {
                        add(el(), eb());
                        add(er(), et());
                    } else {
                        add(eb(), er());
                        add(et(), el());
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Stitch segments into chains; every edge key touches at most two segments.
    std::map<std::uint64_t, std::vector<std::size_t>> adj;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        adj[segs[i].first].push_back(i);
        adj[segs[i].second].push_back(i);
    }
    std::vector<bool> used(segs.size(), false);
    auto other_end = [&](std::size_t s, std::uint64_t k) {
        return segs[s].first == k ? segs[s].second : segs[s].first;
    };
    auto next_seg = [&](std::uint64_t k, std::size_t prev) -> long long {
        for (std::size_t s : adj[k])
            if (s != prev && !used[s]) return (long long)s;
        return -1;
    };

    for (std::size_t start = 0; start < segs.size(); ++start) {
        if (used[start]) continue;
        used[start] = true;
        std::vector<std::uint64_t> chain{segs[start].first, segs[start].second};
        // grow forward
        for (;;) {
            long long s = next_seg(chain.back(), SIZE_MAX);
            if (s < 0) break;
            used[std::size_t(s)] = true;
            chain.push_back(other_end(std::size_t(s), chain.back()));
            if (chain.back() == chain.front()) break;
        }
        bool is_closed = chain.size() > 2 && chain.back() == chain.front();
        if (!is_closed) {
            // grow backward
            for (;;) {
                long long s = next_seg(chain.front(), SIZE_MAX);
                if (s < 0) break;
                used[std::size_t(s)] = true;
                chain.insert(chain.begin(), other_end(std::size_t(s), chain.front()));
            }
        }
        std::vector<Vec2> line;
        line.reserve(chain.size());
        for (std::uint64_t k : chain) line.push_back(verts.at(k));
        out.polylines.push_back(std::move(line));
        out.closed.push_back(is_closed);
    }
    return out;
}

void write_map_csv(std::ostream& os, const SpatialMap& map) {
    os << "x,y,value\n";
    for (int iy = 0; iy < map.grid.ny; ++iy) {
        for (int ix = 0; ix < map.grid.nx; ++ix) {
            Vec2 c = map.grid.center(ix, iy);
            os << fmt17(c.x) << ',' << fmt17(c.y) << ',' << fmt17(map.at(ix, iy)) << '\n';
        }
    }
}

namespace {

constexpr char kMapMagic[8] = {'C', 'R', 'A', 'M', 'A', 'P', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, std::uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}

std::string get_string(std::istream& is) {
    auto n = get<std::uint32_t>(is);
    if (n > (1u << 20)) throw std::runtime_error("map: corrupt string length");
    std::string s(n, '\0');
    is.read(s.data(), std::streamsize(n));
    return s;
}

}  // namespace

void write_map_binary(std::ostream& os, const SpatialMap& map) {
    os.write(kMapMagic, sizeof kMapMagic);
    put<std::int32_t>(os, map.grid.nx);
    put<std::int32_t>(os, map.grid.ny);
    put(os, map.grid.xmin);
    put(os, map.grid.ymin);
    put(os, map.grid.xmax);
    put(os, map.grid.ymax);
    put_string(os, map.quantity);
    put_string(os, map.units);
    put(os, map.scene_hash);
    os.write(reinterpret_cast<const char*>(map.values.data()),
             std::streamsize(map.values.size() * sizeof(double)));
}

SpatialMap read_map_binary(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMapMagic, sizeof magic) != 0)
        throw std::runtime_error("map: bad magic");
    SpatialMap m;
    m.grid.nx = get<std::int32_t>(is);
    m.grid.ny = get<std::int32_t>(is);
    m.grid.xmin = get<double>(is);
    m.grid.ymin = get<double>(is);
    m.grid.xmax = get<double>(is);
    m.grid.ymax = get<double>(is);
    m.quantity = get_string(is);
    m.units = get_string(is);
    m.scene_hash = get<std::uint64_t>(is);
    if (m.grid.nx < 1 || m.grid.ny < 1 || m.grid.nx > (1 << 16) || m.grid.ny > (1 << 16))
        throw std::runtime_error("map: corrupt dimensions");
    m.values.resize(std::size_t(m.grid.nx) * m.grid.ny);
    is.read(reinterpret_cast<char*>(m.values.data()),
            std::streamsize(m.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("map: truncated payload");
    return m;
}

std::string contour_geojson(const GeofenceContour& contour) {
    JsonWriter w;
    w.begin_object();
    w.key("type").value("FeatureCollection");
    w.key("properties").begin_object();
    w.key("threshold").value(contour.threshold);
    w.end_object();
    w.key("features").begin_array();
    for (std::size_t i = 0; i < contour.polylines.size(); ++i) {
        w.begin_object();
        w.key("type").value("Feature");
        w.key("properties").begin_object();
        w.key("closed").value(contour.closed[i]);
        w.end_object();
        w.key("geometry").begin_object();
        w.key("type").value("LineString");
        w.key("coordinates").begin_array();
        for (const Vec2& p : contour.polylines[i])
            w.begin_array().value(p.x).value(p.y).end_array();
        w.end_array();
        w.end_object();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace cra
