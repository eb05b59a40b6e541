#include "groundsim/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace groundsim::perception {

using nlohmann::json;

namespace {

const char* kGlassesJson = R"({
  "classes": [
    {"name": "bordeauxGlass", "surface": "bordeaux glass", "properties": {"bowl": ["elliptical", "tapered"]}},
    {"name": "brandyGlass", "surface": "brandy glass", "properties": {"bowl": ["wide", "tapered", "round"], "stem": ["short"]}},
    {"name": "burgundyGlass", "surface": "burgundy glass", "properties": {"bowl": ["wide", "tapered", "round"]}},
    {"name": "champagneCoupe", "surface": "champagne coupe", "properties": {"bowl": ["broad", "round"]}},
    {"name": "martiniGlass", "surface": "martini glass", "properties": {"bowl": ["broad", "conic"]}}
  ],
  "parts": [
    {"name": "bowl", "surface": "bowl"},
    {"name": "stem", "surface": "stem"}
  ],
  "attributes": ["elliptical", "tapered", "wide", "round", "short", "broad", "conic"]
})";

Vec gaussian(int n, double scale, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(static_cast<std::size_t>(n));
  for (auto& x : v) x = scale * nd(rng);
  return v;
}

// Random direction with the given norm.
Vec direction(int n, double norm, Rng& rng) {
  Vec v = gaussian(n, 1.0, rng);
  double len = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (auto& x : v) x *= norm / len;
  return v;
}

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::set<std::string> attrs_for(const PropertySet& props, const std::string& part) {
  std::set<std::string> out;
  for (const auto& p : props)
    if (p.part == part) out.insert(p.attribute);
  return out;
}

}  // namespace

double relation_score(const Box& whole, const Box& part) {
  if (!(part.w > 0) || !(part.h > 0)) throw PerceptionError("degenerate part box");
  if (!(whole.w > 0) || !(whole.h > 0)) throw PerceptionError("degenerate whole box");
  double ix = std::max(0.0, std::min(whole.x + whole.w, part.x + part.w) - std::max(whole.x, part.x));
  double iy = std::max(0.0, std::min(whole.y + whole.h, part.y + part.h) - std::max(whole.y, part.y));
  return std::clamp(ix * iy / (part.w * part.h), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Domain

const PropertySet& DomainSpec::properties_of(const std::string& c) const {
  auto it = properties.find(c);
  if (it == properties.end()) throw PerceptionError("unknown class " + c);
  return it->second;
}

DomainSpec DomainSpec::from_json(const json& j) {
  DomainSpec d;
  for (const auto& c : j.at("classes")) {
    std::string name = c.at("name");
    if (d.properties.count(name)) throw PerceptionError("duplicate class " + name);
    d.classes.push_back(name);
    d.surface[name] = c.at("surface");
    PropertySet props;
    for (const auto& [part, attrs] : c.at("properties").items())
      for (const auto& a : attrs) props.insert(Property{a.get<std::string>(), part});
    d.properties[name] = props;
  }
  for (const auto& p : j.at("parts")) {
    d.parts.push_back(p.at("name"));
    d.surface[p.at("name")] = p.at("surface");
  }
  for (const auto& a : j.at("attributes")) {
    d.attributes.push_back(a);
    d.surface[a] = a;
  }
  for (const auto& [cls, props] : d.properties)
    for (const auto& p : props) {
      if (std::find(d.parts.begin(), d.parts.end(), p.part) == d.parts.end())
        throw PerceptionError(cls + " uses undeclared part " + p.part);
      if (std::find(d.attributes.begin(), d.attributes.end(), p.attribute) == d.attributes.end())
        throw PerceptionError(cls + " uses undeclared attribute " + p.attribute);
    }
  return d;
}

DomainSpec DomainSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PerceptionError("cannot open domain file " + path);
  return from_json(json::parse(in));
}

DomainSpec DomainSpec::glasses() { return from_json(json::parse(kGlassesJson)); }

json DomainSpec::to_json() const {
  json j;
  j["classes"] = json::array();
  for (const auto& c : classes) {
    json props = json::object();
    for (const auto& part : parts) {
      auto as = attrs_for(properties.at(c), part);
      if (as.empty()) continue;
      // Keep declaration order of attributes.
      json arr = json::array();
      for (const auto& a : attributes)
        if (as.count(a)) arr.push_back(a);
      props[part] = arr;
    }
    j["classes"].push_back({{"name", c}, {"surface", surface.at(c)}, {"properties", props}});
  }
  j["parts"] = json::array();
  for (const auto& p : parts) j["parts"].push_back({{"name", p}, {"surface", surface.at(p)}});
  j["attributes"] = attributes;
  return j;
}

json SimParams::to_json() const {
  return {{"dim_class", dim_class},
          {"dim_attr", dim_attr},
          {"class_noise", class_noise},
          {"family_scale", family_scale},
          {"property_scale", property_scale},
          {"class_offset", class_offset},
          {"part_separation", part_separation},
          {"part_noise", part_noise},
          {"attr_magnitude", attr_magnitude},
          {"attr_magnitude_override", attr_magnitude_override},
          {"attr_noise", attr_noise},
          {"relation_threshold", relation_threshold},
          {"distractors", distractors}};
}

SimParams SimParams::from_json(const json& j) { return from_json(j, SimParams{}); }

SimParams SimParams::from_json(const json& j, SimParams p) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("dim_class", p.dim_class);
  get("dim_attr", p.dim_attr);
  get("class_noise", p.class_noise);
  get("family_scale", p.family_scale);
  get("property_scale", p.property_scale);
  get("class_offset", p.class_offset);
  get("part_separation", p.part_separation);
  get("part_noise", p.part_noise);
  get("attr_magnitude", p.attr_magnitude);
  get("attr_magnitude_override", p.attr_magnitude_override);
  get("attr_noise", p.attr_noise);
  get("relation_threshold", p.relation_threshold);
  get("distractors", p.distractors);
  if (p.dim_class < 1 || p.dim_attr < 1) throw PerceptionError("feature dimensions must be positive");
  if (p.relation_threshold <= 0 || p.relation_threshold > 1) throw PerceptionError("relation_threshold out of (0,1]");
  return p;
}

// ---------------------------------------------------------------------------
// Generator

FeatureModel::FeatureModel(DomainSpec domain, SimParams params, std::uint64_t suite_seed)
    : domain_(std::move(domain)), params_(std::move(params)) {
  Rng rng(derive_seed({suite_seed, 0x70726f746fULL}));
  const int dc = params_.dim_class;
  Vec family = gaussian(dc, params_.family_scale / std::sqrt(dc), rng);

  std::map<Property, Vec> prop_dir;
  for (const auto& c : domain_.classes)
    for (const auto& p : domain_.properties.at(c)) prop_dir.try_emplace(p);
  for (auto& [p, v] : prop_dir) v = direction(dc, 1.0, rng);

  for (const auto& c : domain_.classes) {
    Vec proto = family;
    for (const auto& p : domain_.properties.at(c)) axpy(proto, params_.property_scale, prop_dir.at(p));
    axpy(proto, 1.0, direction(dc, params_.class_offset, rng));
    class_proto_[c] = proto;
  }
  for (const auto& part : domain_.parts) part_proto_[part] = direction(dc, params_.part_separation, rng);
  for (const auto& a : domain_.attributes) {
    auto it = params_.attr_magnitude_override.find(a);
    double m = it == params_.attr_magnitude_override.end() ? params_.attr_magnitude : it->second;
    attr_dir_[a] = direction(params_.dim_attr, m, rng);
  }
}

Vec FeatureModel::sample_object_feature(const std::string& cls, Rng& rng) const {
  Vec v = class_proto_.at(cls);
  axpy(v, 1.0, gaussian(params_.dim_class, params_.class_noise, rng));
  return v;
}

Vec FeatureModel::sample_part_feature(const std::string& kind, Rng& rng) const {
  Vec v = part_proto_.at(kind);
  axpy(v, 1.0, gaussian(params_.dim_class, params_.part_noise, rng));
  return v;
}

Vec FeatureModel::sample_attr_feature(const std::set<std::string>& attrs, Rng& rng) const {
  Vec v = gaussian(params_.dim_attr, params_.attr_noise, rng);
  for (const auto& a : attrs) axpy(v, 1.0, attr_dir_.at(a));
  return v;
}

SceneObject FeatureModel::sample_object(const std::string& cls, std::uint64_t seed, const std::string& id,
                                        double slot_x) const {
  if (!domain_.has_class(cls)) throw PerceptionError("unknown target class " + cls);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double slot = 1.0 / (1 + std::max(0, params_.distractors));
  SceneObject o;
  o.id = id;
  o.cls = cls;
  o.bbox.w = slot * (0.7 + 0.2 * u(rng));
  o.bbox.h = 0.6 + 0.2 * u(rng);
  // parts stick out left by at most a tenth of their width; keep that inside the slot
  o.bbox.x = slot_x + 0.1 * slot + (0.9 * slot - o.bbox.w) * u(rng);
  o.bbox.y = 0.05 + 0.1 * u(rng);
  o.class_feature = sample_object_feature(cls, rng);

  const auto& props = domain_.properties.at(cls);
  const double lo = std::max(params_.relation_threshold, 0.9);
  int k = 0;
  for (const auto& kind : domain_.parts) {
    ScenePart p;
    p.id = id + "p" + std::to_string(++k);
    p.kind = kind;
    // Parts stack vertically inside the whole; a horizontal shift pushes a
    // share (1 - r) of the part outside.
    const double band = o.bbox.h / static_cast<double>(domain_.parts.size());
    p.bbox.w = o.bbox.w * (0.5 + 0.3 * u(rng));
    p.bbox.h = band * 0.9;
    p.bbox.y = o.bbox.y + band * (k - 1) + band * 0.05;
    double r = lo + (1.0 - lo) * u(rng);
    p.bbox.x = o.bbox.x - (1.0 - r) * p.bbox.w;
    p.attributes = attrs_for(props, kind);
    p.class_feature = sample_part_feature(kind, rng);
    p.attr_feature = sample_attr_feature(p.attributes, rng);
    o.parts.push_back(std::move(p));
  }
  return o;
}

Scene FeatureModel::generate_scene(const std::string& target, std::uint64_t seed) const {
  if (!domain_.has_class(target)) throw PerceptionError("unknown target class " + target);
  Rng rng(derive_seed({seed, 0x7363656eULL}));
  const int n = 1 + std::max(0, params_.distractors);
  const double slot = 1.0 / n;
  Scene s;
  s.objects.push_back(sample_object(target, rng(), "o1", 0.0));
  for (int i = 1; i < n; ++i) {
    const auto& cls = domain_.classes[rng() % domain_.classes.size()];
    s.objects.push_back(sample_object(cls, rng(), "o" + std::to_string(i + 1), slot * i));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Exemplar base

ExemplarBase::ExemplarBase(int dim_class, int dim_attr, ClassifierParams params)
    : dim_class_(dim_class), dim_attr_(dim_attr), params_(params) {}

const ConceptExemplars* ExemplarBase::find(const std::string& name) const {
  auto it = concepts_.find(name);
  return it == concepts_.end() ? nullptr : &it->second;
}

std::vector<std::string> ExemplarBase::concepts(Space s) const {
  std::vector<std::string> out;
  for (const auto& [name, c] : concepts_)
    if (c.space == s) out.push_back(name);
  return out;
}

void ExemplarBase::add_exemplar(const std::string& name, Space space, const Vec& feature, bool positive) {
  if (static_cast<int>(feature.size()) != dim(space)) throw PerceptionError("feature dimension mismatch for " + name);
  auto [it, fresh] = concepts_.try_emplace(name);
  auto& c = it->second;
  if (fresh) c.space = space;
  if (c.space != space) throw PerceptionError("name " + name + " used in two feature spaces");
  auto& mine = positive ? c.positive : c.negative;
  auto& other = positive ? c.negative : c.positive;
  other.erase(std::remove(other.begin(), other.end(), feature), other.end());
  if (std::find(mine.begin(), mine.end(), feature) == mine.end()) mine.push_back(feature);
  refresh_bandwidth(c);
}

void ExemplarBase::process_correction(const std::string& wrong, const std::string& truth, const Vec& feature) {
  add_exemplar(truth, Space::Class, feature, true);
  add_exemplar(wrong, Space::Class, feature, false);
}

void ExemplarBase::refresh_bandwidth(ConceptExemplars& c) {
  std::vector<const Vec*> all;
  for (const auto& v : c.positive) all.push_back(&v);
  for (const auto& v : c.negative) all.push_back(&v);
  if (all.size() < 2) {
    c.bandwidth = 1.0;
    return;
  }
  std::vector<double> d;
  d.reserve(all.size() * (all.size() - 1) / 2);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) d.push_back(std::sqrt(sq_dist(*all[i], *all[j])));
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = (med + *std::max_element(d.begin(), mid)) / 2;
  c.bandwidth = std::max(med, params_.bandwidth_floor);
}

double ExemplarBase::classify(const std::string& name, const Vec& feature) const {
  const auto* c = find(name);
  if (!c) return 0.5;
  if (static_cast<int>(feature.size()) != dim(c->space)) throw PerceptionError("feature dimension mismatch for " + name);
  if (c->positive.empty() && c->negative.empty()) return 0.5;
  if (c->negative.empty()) return params_.one_sided_positive;
  if (c->positive.empty()) return params_.one_sided_negative;
  const double inv = 1.0 / (2 * c->bandwidth * c->bandwidth);
  // mean similarity over the k nearest exemplars of a set
  auto mean_sim = [&](const std::vector<Vec>& set) {
    std::vector<double> sims;
    sims.reserve(set.size());
    for (const auto& e : set) sims.push_back(std::exp(-sq_dist(feature, e) * inv));
    std::size_t k = params_.neighbors > 0 ? std::min<std::size_t>(params_.neighbors, sims.size()) : sims.size();
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(), std::greater<>());
    return std::accumulate(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), 0.0) / static_cast<double>(k);
  };
  double mp = mean_sim(c->positive), mn = mean_sim(c->negative);
  double z = params_.beta * std::log((mp + params_.delta) / (mn + params_.delta));
  return 1.0 / (1.0 + std::exp(-z));
}

json ExemplarBase::to_json() const {
  json j = json::object();
  for (const auto& [name, c] : concepts_) {
    j[name] = {{"space", c.space == Space::Class ? "class" : "attribute"},
               {"positive", c.positive},
               {"negative", c.negative},
               {"bandwidth", c.bandwidth}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Priors

namespace {

struct AttrSlot {
  std::string cls;
  std::string part;
  std::set<std::string> attrs;
};

std::vector<AttrSlot> attr_slots(const DomainSpec& d) {
  std::vector<AttrSlot> out;
  for (const auto& c : d.classes)
    for (const auto& part : d.parts) out.push_back({c, part, attrs_for(d.properties.at(c), part)});
  return out;
}

// Draws (feature, label) samples for one prior name. Negatives for part
// kinds mix other parts with whole objects.
std::vector<std::pair<Vec, bool>> draw_samples(const FeatureModel& m, const std::string& name, Space space,
                                               int positives, int negatives, Rng& rng) {
  const auto& d = m.domain();
  std::vector<std::pair<Vec, bool>> out;
  if (space == Space::Class) {
    std::vector<std::string> others;
    for (const auto& p : d.parts)
      if (p != name) others.push_back(p);
    for (int i = 0; i < positives; ++i) out.emplace_back(m.sample_part_feature(name, rng), true);
    for (int i = 0; i < negatives; ++i) {
      if (i % 2 == 0 && !others.empty())
        out.emplace_back(m.sample_part_feature(others[rng() % others.size()], rng), false);
      else
        out.emplace_back(m.sample_object_feature(d.classes[rng() % d.classes.size()], rng), false);
    }
    return out;
  }
  std::vector<AttrSlot> with, without, near;
  for (auto& s : attr_slots(d)) (s.attrs.count(name) ? with : without).push_back(s);
  if (with.empty() || without.empty()) throw PerceptionError("attribute " + name + " cannot be sampled both ways");
  // half the negatives are parts of a kind that can carry the attribute
  for (const auto& s : without)
    if (std::any_of(with.begin(), with.end(), [&](const AttrSlot& w) { return w.part == s.part; })) near.push_back(s);
  if (near.empty()) near = without;
  for (int i = 0; i < positives; ++i) out.emplace_back(m.sample_attr_feature(with[rng() % with.size()].attrs, rng), true);
  for (int i = 0; i < negatives; ++i) {
    const auto& pool = i % 2 == 0 ? near : without;
    out.emplace_back(m.sample_attr_feature(pool[rng() % pool.size()].attrs, rng), false);
  }
  return out;
}

}  // namespace

void init_priors(ExemplarBase& xb, const FeatureModel& model, std::uint64_t seed, int per_polarity,
                 double negative_ratio) {
  const int negatives = static_cast<int>(std::lround(per_polarity * negative_ratio));
  Rng rng(derive_seed({seed, 0x7072696fULL}));
  for (const auto& p : model.domain().parts)
    for (auto& [f, pos] : draw_samples(model, p, Space::Class, per_polarity, negatives, rng)) xb.add_exemplar(p, Space::Class, f, pos);
  for (const auto& a : model.domain().attributes)
    for (auto& [f, pos] : draw_samples(model, a, Space::Attribute, per_polarity, negatives, rng))
      xb.add_exemplar(a, Space::Attribute, f, pos);
}

PriorStats evaluate_priors(const ExemplarBase& xb, const FeatureModel& model, std::uint64_t seed, int samples) {
  Rng rng(derive_seed({seed, 0x6576616cULL}));
  PriorStats st;
  auto acc = [&](const std::string& c, Space s) {
    int right = 0;
    auto data = draw_samples(model, c, s, samples / 2, samples / 2, rng);
    for (const auto& [f, pos] : data) right += ((xb.classify(c, f) > 0.5) == pos);
    double a = static_cast<double>(right) / static_cast<double>(data.size());
    st.per_concept[c] = a;
    return a;
  };
  double ps = 0, as = 0;
  for (const auto& p : model.domain().parts) ps += acc(p, Space::Class);
  for (const auto& a : model.domain().attributes) as += acc(a, Space::Attribute);
  st.part_accuracy = ps / static_cast<double>(model.domain().parts.size());
  st.attribute_accuracy = as / static_cast<double>(model.domain().attributes.size());
  return st;
}

// ---------------------------------------------------------------------------
// Scene graphs

const SceneNode* SceneGraph::node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

double SceneGraph::relation(const std::string& from, const std::string& to, const std::string& rel) const {
  for (const auto& e : edges) {
    if (e.from != from || e.to != to) continue;
    auto it = e.relations.find(rel);
    return it == e.relations.end() ? 0.0 : it->second;
  }
  return 0.0;
}

std::vector<std::string> SceneGraph::part_candidates(const std::string& object) const {
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (n.is_part && relation(object, n.id) > 0) out.push_back(n.id);
  return out;
}

std::set<std::string> SceneGraph::vocabulary() const {
  std::set<std::string> v;
  for (const auto& n : nodes) {
    for (const auto& [c, s] : n.classes) v.insert(c);
    for (const auto& [a, s] : n.attributes) v.insert(a);
  }
  for (const auto& e : edges)
    for (const auto& [r, s] : e.relations) v.insert(r);
  return v;
}

json SceneGraph::to_json() const {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : nodes)
    j["nodes"].push_back({{"id", n.id},
                          {"bbox", {n.bbox.x, n.bbox.y, n.bbox.w, n.bbox.h}},
                          {"part", n.is_part},
                          {"classes", n.classes},
                          {"attributes", n.attributes}});
  j["edges"] = json::array();
  for (const auto& e : edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"relations", e.relations}});
  return j;
}

SceneGraph SceneGraph::from_json(const json& j) {
  SceneGraph g;
  for (const auto& n : j.at("nodes")) {
    SceneNode s;
    s.id = n.at("id");
    const auto& b = n.at("bbox");
    s.bbox = Box{b.at(0), b.at(1), b.at(2), b.at(3)};
    s.is_part = n.at("part");
    n.at("classes").get_to(s.classes);
    n.at("attributes").get_to(s.attributes);
    g.nodes.push_back(std::move(s));
  }
  for (const auto& e : j.at("edges")) {
    SceneEdge s;
    s.from = e.at("from");
    s.to = e.at("to");
    e.at("relations").get_to(s.relations);
    g.edges.push_back(std::move(s));
  }
  return g;
}

SceneGraph build_scene_graph(const Scene& scene, const ExemplarBase& xb,
                             const std::vector<std::pair<std::string, Space>>& extra_concepts) {
  std::vector<std::string> class_concepts = xb.concepts(Space::Class);
  std::vector<std::string> attr_concepts = xb.concepts(Space::Attribute);
  for (const auto& [c, s] : extra_concepts) {
    auto& list = s == Space::Class ? class_concepts : attr_concepts;
    if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
  }
  SceneGraph g;
  for (const auto& o : scene.objects) {
    SceneNode n{o.id, o.bbox, false, {}, {}};
    for (const auto& c : class_concepts) n.classes[c] = xb.classify(c, o.class_feature);
    g.nodes.push_back(std::move(n));
    for (const auto& p : o.parts) {
      SceneNode pn{p.id, p.bbox, true, {}, {}};
      for (const auto& c : class_concepts) pn.classes[c] = xb.classify(c, p.class_feature);
      for (const auto& a : attr_concepts) pn.attributes[a] = xb.classify(a, p.attr_feature);
      g.nodes.push_back(std::move(pn));
    }
  }
  for (const auto& whole : scene.objects)
    for (const auto& o : scene.objects)
      for (const auto& p : o.parts)
        g.edges.push_back(SceneEdge{whole.id, p.id, {{"have", relation_score(whole.bbox, p.bbox)}}});
  return g;
}

}  // namespace groundsim::perception
