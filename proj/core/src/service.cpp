#include "lpdiag/service.hpp"

#include <fstream>
#include <httplib.h>
#include <json.hpp>

#include "lpdiag/error.hpp"
#include "lpdiag/parser.hpp"

namespace lpdiag {

namespace {

using nlohmann::json;

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string rfc3339_now(std::chrono::system_clock::time_point t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::kSyntax:
    case ErrorCode::kDuplicateBlockDeclaration:
    case ErrorCode::kInvalidProgram:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kWellFormednessViolation:
      return 400;
    case ErrorCode::kUnknownNode:
      return 404;
    case ErrorCode::kJudgmentConflict:
    case ErrorCode::kNoActiveJudgment:
      return 409;
    case ErrorCode::kNotASymptomCandidate:
    case ErrorCode::kAnswerNotFound:
    case ErrorCode::kPseudoProofRejected:
    case ErrorCode::kProbeInconclusive:
    case ErrorCode::kNoTarget:
    case ErrorCode::kSpecDivergence:
    case ErrorCode::kUnresolvedOracleQuery:
      return 422;
    default:
      return 500;
  }
}

ServiceResponse error_response(int status, std::string_view code, const std::string& detail,
                               const std::optional<SourcePos>& pos = std::nullopt) {
  json body{{"error", code}, {"detail", detail}};
  if (pos) body["position"] = json{{"line", pos->line}, {"column", pos->column}};
  return ServiceResponse{status, body.dump()};
}

ServiceResponse ok(const json& body, int status = 200) { return ServiceResponse{status, body.dump()}; }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body is not a JSON object");
  return j;
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

Term single_goal(const std::string& text) {
  ParsedQuery q = parse_query(text);
  if (q.goals.size() != 1) throw Error(ErrorCode::kInvalidArgument, "expected a single atom, got '" + text + "'");
  return q.goals.front();
}

Limits limits_from(const json& j) {
  Limits l;
  if (j.contains("limits")) {
    const json& o = j["limits"];
    if (o.contains("depth")) l.max_depth = o["depth"].get<std::uint64_t>();
    if (o.contains("time_ms")) l.time_ms = o["time_ms"].get<std::int64_t>();
    if (o.contains("answers")) l.answer_cap = o["answers"].get<std::size_t>();
  }
  l.validate();
  return l;
}

json state_json(const DiagnosisSession& s) {
  SearchState st = s.state();
  json o{{"status", session_status_name(st.status)},
         {"suspect_region_size", st.suspect_region.size()},
         {"suspect_region", st.suspect_region}};
  o["target"] = st.target ? json(*st.target) : json(nullptr);
  o["frontier"] = st.frontier ? json(*st.frontier) : json(nullptr);
  return o;
}

json nodes_of(const std::string& snapshot, const std::vector<NodeId>& ids) {
  json doc = json::parse(snapshot);
  json out = json::array();
  for (NodeId id : ids)
    for (const json& n : doc["nodes"])
      if (n["node_id"] == id) out.push_back(n);
  return out;
}

}  // namespace

void SessionService::Entry::refresh() {
  auto snap = std::make_shared<const std::string>(session->snapshot_json());
  std::lock_guard lock(snap_mutex);
  snapshot = std::move(snap);
}

std::shared_ptr<const std::string> SessionService::Entry::current() const {
  std::lock_guard lock(snap_mutex);
  return snapshot;
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownNode, "no session '" + id + "'");
  return it->second;
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(map_mutex_);
  return sessions_.size();
}

void SessionService::save_snapshot(const std::string& id, const std::string& path) const {
  auto e = find(id);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << *e->current() << '\n';
}

ServiceResponse SessionService::create(std::string_view body) {
  json req = parse_body(body);
  std::string program_text = require_string(req, "program");
  std::string kind_text = require_string(req, "kind");
  TreeKind kind;
  if (kind_text == "incorrectness")
    kind = TreeKind::kIncorrectness;
  else if (kind_text == "incompleteness")
    kind = TreeKind::kIncompleteness;
  else
    throw Error(ErrorCode::kInvalidArgument, "kind must be incorrectness or incompleteness");

  auto prog = std::make_shared<const Program>(parse_program(program_text));
  std::shared_ptr<const ApproximateSpec> spec;
  std::string spec_text;
  if (req.contains("spec") && !req["spec"].is_null()) {
    spec_text = require_string(req, "spec");
    spec = ApproximateSpec::load(spec_text);
  }
  SessionOptions so;
  so.limits = limits_from(req);
  if (req.contains("strategy")) so.strategy = parse_strategy(require_string(req, "strategy"));
  if (req.contains("mode")) {
    std::string m = require_string(req, "mode");
    if (m == "plain")
      so.mode = SolveMode::kPlain;
    else if (m != "coroutining")
      throw Error(ErrorCode::kInvalidArgument, "mode must be plain or coroutining");
  }
  if (req.contains("occurs_check")) so.occurs_check = req["occurs_check"].get<bool>();
  if (req.contains("strict")) so.strict = req["strict"].get<bool>();
  so.root_check = spec ? RootCheck::kVerify : RootCheck::kAssert;

  Term root = single_goal(require_string(req, "query"));
  std::unique_ptr<DiagnosisSession> session;
  if (kind == TreeKind::kIncompleteness) {
    session = start_incompleteness(prog, root, so, spec);
  } else {
    SolveOptions opts;
    opts.mode = so.mode;
    opts.limits = so.limits;
    opts.occurs_check = so.occurs_check;
    opts.record_trace = false;
    Outcome o = solve(*prog, {root}, opts);
    std::optional<Term> answer;
    if (req.contains("answer") && !req["answer"].is_null()) {
      answer = single_goal(require_string(req, "answer"));
    } else if (spec) {
      auto u = spec->universe_for(prog->signature(), {root});
      for (const PseudoAnswer& a : o.answers)
        if (a.genuine() && judge_correctness(*spec, a.answer.front(), u).value == Verdict::kSymptom) {
          answer = a.answer.front();
          break;
        }
      if (!answer)
        throw Error(ErrorCode::kNotASymptomCandidate, "no computed answer of " + to_string(root) +
                                                          " is outside the specification");
    } else {
      throw Error(ErrorCode::kInvalidArgument, "incorrectness sessions without a spec need an 'answer'");
    }
    session = start_incorrectness(prog, o, *answer, so, spec);
  }

  auto e = std::make_shared<Entry>();
  e->handle.kind = kind;
  e->handle.created = std::chrono::system_clock::now();
  e->handle.program_fingerprint = fingerprint(program_text);
  if (spec) e->handle.spec_fingerprint = fingerprint(spec_text);
  e->session = std::move(session);
  e->refresh();
  {
    std::unique_lock lock(map_mutex_);
    e->handle.id = "s" + std::to_string(next_id_++);
    sessions_.emplace(e->handle.id, e);
  }
  json out{{"session_id", e->handle.id},
           {"kind", tree_kind_name(kind)},
           {"created_at", rfc3339_now(e->handle.created)},
           {"program_fingerprint", e->handle.program_fingerprint},
           {"root", to_string(e->session->tree().node(1).atom)}};
  out["spec_fingerprint"] = spec ? json(e->handle.spec_fingerprint) : json(nullptr);
  out["oracle"] = spec ? "spec" : "interactive";
  out.update(state_json(*e->session));
  return ok(out, 201);
}

ServiceResponse SessionService::route_session(std::string_view method, const std::vector<std::string>& parts,
                                              const std::map<std::string, std::string>& params,
                                              std::string_view body) {
  auto e = find(parts[1]);
  if (parts.size() == 3 && method == "GET") {
    if (parts[2] == "tree") {
      std::shared_ptr<const std::string> snap = e->current();
      auto node = params.find("node");
      if (node == params.end()) return ServiceResponse{200, *snap};
      json doc = json::parse(*snap);
      NodeId id = static_cast<NodeId>(std::stoul(node->second));
      std::lock_guard lock(e->write);
      doc["nodes"] = nodes_of(*snap, e->session->tree().subtree(id));
      return ok(doc);
    }
    std::lock_guard lock(e->write);
    DiagnosisSession& s = *e->session;
    if (parts[2] == "suggest") {
      std::optional<NodeId> q = s.next_query();
      e->refresh();
      json out = state_json(s);
      out["node_id"] = q ? json(*q) : json(nullptr);
      if (q) out["atom"] = to_string(s.tree().node(*q).atom);
      return ok(out);
    }
    if (parts[2] == "report") {
      json out = state_json(s);
      if (s.status() == SessionStatus::kTargetFound) out["report"] = json::parse(error_report_json(s.derive_error()));
      if (s.unresolved()) out["unresolved"] = *s.unresolved();
      if (s.contradiction())
        out["contradiction"] = json{{"node_id", s.contradiction()->node}, {"reason", s.contradiction()->reason}};
      return ok(out);
    }
  }
  if (parts.size() == 3 && method == "POST" && parts[2] == "auto") {
    std::lock_guard lock(e->write);
    if (!e->session->spec()) throw Error(ErrorCode::kInvalidArgument, "the session has no specification");
    AutoOptions opts;
    opts.session.limits = e->session->tree().config().limits;
    AutoResult r = run_oracle(std::move(e->session), opts);
    e->session = std::move(r.session);
    e->refresh();
    json out = state_json(*e->session);
    out["oracle_queries"] = r.oracle_queries;
    out["probes"] = r.probes;
    if (r.report) out["report"] = json::parse(error_report_json(*r.report));
    if (!r.detail.empty()) out["detail"] = r.detail;
    return ok(out);
  }
  if (parts.size() == 5 && parts[2] == "nodes" && method == "POST") {
    NodeId id;
    try {
      id = static_cast<NodeId>(std::stoul(parts[3]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kUnknownNode, "bad node id '" + parts[3] + "'");
    }
    const std::string& action = parts[4];
    json req = parse_body(body);
    std::lock_guard lock(e->write);
    DiagnosisSession& s = *e->session;
    s.tree().node(id);
    json out;
    if (action == "expand") {
      std::vector<NodeId> kids = s.expand(id);
      e->refresh();
      out["node_id"] = id;
      out["children"] = nodes_of(*e->current(), kids);
      return ok(out);
    }
    if (action == "judge" || action == "revise" || action == "assume") {
      JudgmentValue v = parse_judgment_value(require_string(req, "value"));
      if (action == "judge")
        s.submit(id, v, Provenance::kUser, req.value("note", ""));
      else if (action == "revise")
        s.revise(id, v);
      else
        s.assume(id, v);
    } else if (action == "withdraw") {
      s.withdraw(id);
    } else if (action == "postpone") {
      s.postpone(id);
    } else if (action == "probe") {
      ProbeOptions po;
      po.limits = limits_from(req);
      po.skip_plain = req.value("skip_plain", false);
      ProbeResult r = s.probe(id, po);
      out["step"] = r.step;
      out["note"] = r.note;
    } else {
      return error_response(404, "NotFound", "unknown action '" + action + "'");
    }
    e->refresh();
    out.update(state_json(s));
    out["node_id"] = id;
    out["node"] = nodes_of(*e->current(), {id}).at(0);
    return ok(out);
  }
  return error_response(404, "NotFound", "no route for " + std::string(method));
}

ServiceResponse SessionService::handle(std::string_view method, std::string_view path,
                                       const std::map<std::string, std::string>& params, std::string_view body) {
  try {
    std::vector<std::string> parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions") return error_response(404, "NotFound", "no such resource");
    if (parts.size() == 1) {
      if (method == "POST") return create(body);
      if (method == "GET") {
        json list = json::array();
        std::shared_lock lock(map_mutex_);
        for (const auto& [id, e] : sessions_)
          list.push_back(json{{"session_id", id}, {"kind", tree_kind_name(e->handle.kind)},
                              {"created_at", rfc3339_now(e->handle.created)}});
        return ok(json{{"sessions", list}});
      }
      return error_response(405, "MethodNotAllowed", std::string(method) + " /sessions");
    }
    return route_session(method, parts, params, body);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), error_code_name(e.code()), e.detail(), e.position());
  } catch (const json::exception& e) {
    return error_response(400, "InvalidArgument", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

HttpServer::HttpServer(SessionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> params;
    for (const auto& [k, v] : req.params) params[k] = v;
    ServiceResponse r = service_.handle(req.method, req.path, params, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server_->Get(R"(/sessions.*)", forward);
  server_->Post(R"(/sessions.*)", forward);
  server_->Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kInvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace lpdiag
