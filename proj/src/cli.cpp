#include "fixcalc/cli.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fixcalc/classify.hpp"
#include "fixcalc/session.hpp"

namespace fixcalc::cli {

using prodgrp::AmbientSpec;
using prodgrp::Endomorphism;
using prodgrp::FixReport;
using prodgrp::FixSource;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
      return 2;
    case ErrorKind::dimension:
      return 3;
    case ErrorKind::missing_data:
      return 4;
    case ErrorKind::verification:
      return 5;
    case ErrorKind::range:
      return 6;
  }
  return 1;
}

namespace {

struct Args {
  std::vector<std::string> positional;
  std::map<std::string, std::string> options;
  std::set<std::string> flags;
};

Args split_args(const std::vector<std::string>& raw,
                const std::set<std::string>& value_options,
                const std::set<std::string>& flag_options) {
  Args out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string& a = raw[i];
    if (a.rfind("--", 0) == 0) {
      if (flag_options.count(a)) {
        out.flags.insert(a);
        continue;
      }
      if (!value_options.count(a))
        fail(ErrorKind::parse, "unknown option " + a);
      if (i + 1 >= raw.size())
        fail(ErrorKind::parse, "option " + a + " needs a value");
      out.options[a] = raw[++i];
      continue;
    }
    out.positional.push_back(a);
  }
  return out;
}

// Positional group literals may be quoted as one argument or split across
// several; join everything designated as the group part.
std::string join(const std::vector<std::string>& parts, std::size_t from,
                 std::size_t to) {
  std::string s;
  for (std::size_t i = from; i < to; ++i) {
    if (!s.empty()) s += ' ';
    s += parts[i];
  }
  return s;
}

FixSource resolve_cli_fix_source(const Endomorphism& endo,
                                 const Args& args) {
  if (!endo.is_type1()) return FixSource::whole_group_marker();  // unused
  const prodgrp::BaseEndo& phi = endo.type1().phi;
  auto it = args.options.find("--fixphi");
  if (it != args.options.end()) {
    if (it->second == "identity") return FixSource::whole_group_marker();
    if (it->second == "signed") return FixSource::signed_marker();
    return FixSource::from_basis(parse_basis_file(it->second));
  }
  switch (phi.kind) {
    case prodgrp::BaseEndo::Kind::identity:
      return FixSource::whole_group_marker();
    case prodgrp::BaseEndo::Kind::signed_class:
      return FixSource::signed_marker();
    default:
      fail(ErrorKind::missing_data,
           "phi is not identity or signed-class; pass --fixphi "
           "identity|signed|<basis file>");
  }
}

std::string format_fix_report(const FixReport& rep) {
  std::ostringstream os;
  os << "type=" << rep.type.str() << " s=" << rep.s;
  if (!rep.from_type2) {
    os << " index=";
    if (rep.index)
      os << *rep.index;
    else
      os << "inf";
  }
  os << "\n";
  for (const auto& w : rep.p_basis) os << "basis " << w.str() << "\n";
  for (const auto& [c, a] : rep.abelian_solutions)
    os << "solution c=" << c << " a=" << format_vector(a) << "\n";
  return os.str();
}

long parse_long_option(const Args& args, const std::string& key,
                       long fallback) {
  auto it = args.options.find(key);
  if (it == args.options.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    fail(ErrorKind::parse, "bad integer for " + key);
  }
}

CommandResult cmd_apply(const Args& args) {
  if (args.positional.size() != 2)
    fail(ErrorKind::parse, "usage: apply <endo file> <element>");
  Session session = parse_session_file(args.positional[0]);
  prodgrp::ProdElement e =
      parse_element_literal(session.ambient, args.positional[1]);
  prodgrp::ProdElement image =
      prodgrp::apply(session.ambient, session.first(), e);
  return {0, format_element(image) + "\n", ""};
}

CommandResult cmd_fix(const Args& args) {
  if (args.positional.size() != 1)
    fail(ErrorKind::parse, "usage: fix <endo file> [--fixphi ...]");
  Session session = parse_session_file(args.positional[0]);
  const Endomorphism& endo = session.first();
  FixSource src = resolve_cli_fix_source(endo, args);
  FixReport rep = prodgrp::fix_any(session.ambient, endo, src);
  return {0, format_fix_report(rep), ""};
}

CommandResult cmd_check(const Args& args) {
  if (args.positional.size() != 1)
    fail(ErrorKind::parse, "usage: check <endo file>");
  Session session = parse_session_file(args.positional[0]);
  const Endomorphism& endo = session.first();
  std::ostringstream os;
  os << "mono=" << prodgrp::verdict_str(prodgrp::is_mono(session.ambient, endo))
     << " epi=" << prodgrp::verdict_str(prodgrp::is_epi(session.ambient, endo))
     << " auto="
     << prodgrp::verdict_str(prodgrp::is_auto(session.ambient, endo)) << "\n";
  return {0, os.str(), ""};
}

CommandResult cmd_invert(const Args& args) {
  if (args.positional.size() != 1)
    fail(ErrorKind::parse, "usage: invert <endo file>");
  Session session = parse_session_file(args.positional[0]);
  Endomorphism inv = prodgrp::invert(session.ambient, session.first());
  return {0, format_endo_file(session.ambient, inv), ""};
}

CommandResult cmd_classify(const Args& args) {
  if (args.positional.size() < 2)
    fail(ErrorKind::parse, "usage: classify <group literal> <type>");
  std::string group =
      join(args.positional, 0, args.positional.size() - 1);
  AmbientSpec amb = parse_group_literal(group);
  auto type = SubgroupType::parse(args.positional.back());
  if (!type) fail(ErrorKind::parse, "bad type literal");
  classify::Verdict v = classify::classify(amb, *type);
  return {0, v.str(*type) + "\n", ""};
}

CommandResult cmd_witness(const Args& args) {
  if (args.positional.size() < 2)
    fail(ErrorKind::parse, "usage: witness <group literal> <type>");
  std::string group =
      join(args.positional, 0, args.positional.size() - 1);
  AmbientSpec amb = parse_group_literal(group);
  auto type = SubgroupType::parse(args.positional.back());
  if (!type) fail(ErrorKind::parse, "bad type literal");
  auto recipe = classify::witness(amb, *type);
  if (!recipe)
    fail(ErrorKind::missing_data,
         "the witness for this type is cited elsewhere");
  std::ostringstream os;
  os << "# expected " << recipe->expected.str() << "\n";
  os << format_endo_file(amb, recipe->endo);
  return {0, os.str(), ""};
}

CommandResult cmd_demo(const Args& args) {
  if (args.positional.empty())
    fail(ErrorKind::parse, "usage: demo hopfian|cohopf <group literal>");
  const std::string& which = args.positional[0];
  std::string group = join(args.positional, 1, args.positional.size());
  AmbientSpec amb = parse_group_literal(group);
  if (which == "hopfian") {
    long trials = parse_long_option(args, "--trials", 100);
    long seed = parse_long_option(args, "--seed", 20250801);
    classify::HopfianReport rep =
        classify::hopfian_demo(amb, static_cast<int>(trials),
                               static_cast<unsigned>(seed),
                               args.flags.count("--constrain-epi") > 0);
    std::ostringstream os;
    os << "trials=" << rep.trials << " epi=" << rep.epi_count
       << " mono_violations=" << rep.mono_violations
       << " roundtrip_failures=" << rep.roundtrip_failures << "\n";
    int code = rep.mono_violations == 0 && rep.roundtrip_failures == 0 ? 0 : 5;
    return {code, os.str(), ""};
  }
  if (which == "cohopf") {
    classify::CohopfCertificate cert = classify::cohopf_demo(amb);
    std::ostringstream os;
    const auto& phi = cert.endo.type1().phi;
    for (std::size_t i = 0; i < phi.images.size(); ++i)
      os << "phi x" << (i + 1) << " = " << phi.images[i].str() << "\n";
    os << "image_rank=" << cert.image_rank
       << " x2_in_image=" << (cert.x2_in_image ? "yes" : "no")
       << " mono=" << (cert.mono ? "yes" : "no")
       << " proper=" << (cert.proper() ? "yes" : "no") << "\n";
    return {cert.mono && cert.proper() ? 0 : 5, os.str(), ""};
  }
  fail(ErrorKind::parse, "demo must be hopfian or cohopf");
}

CommandResult cmd_oracle(const Args& args) {
  if (args.positional.size() != 1)
    fail(ErrorKind::parse, "usage: oracle <endo file> [--len L] [--abel B]");
  Session session = parse_session_file(args.positional[0]);
  long len = parse_long_option(args, "--len", 4);
  long abel = parse_long_option(args, "--abel", 2);
  if (len < 0 || abel < 0) fail(ErrorKind::range, "bounds must be >= 0");
  std::vector<prodgrp::ProdElement> fixed = prodgrp::brute_force_fix(
      session.ambient, session.first(), static_cast<std::size_t>(len), abel);
  std::ostringstream os;
  for (const auto& e : fixed) os << format_element(e) << "\n";
  return {0, os.str(), ""};
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args) {
  try {
    if (args.empty())
      fail(ErrorKind::parse,
           "usage: fixgrp apply|fix|check|invert|classify|witness|demo|oracle "
           "...");
    const std::string& cmd = args[0];
    std::vector<std::string> rest(args.begin() + 1, args.end());
    static const std::set<std::string> value_opts{"--fixphi", "--trials",
                                                  "--seed", "--len", "--abel"};
    static const std::set<std::string> flag_opts{"--constrain-epi"};
    Args split = split_args(rest, value_opts, flag_opts);
    if (cmd == "apply") return cmd_apply(split);
    if (cmd == "fix") return cmd_fix(split);
    if (cmd == "check") return cmd_check(split);
    if (cmd == "invert") return cmd_invert(split);
    if (cmd == "classify") return cmd_classify(split);
    if (cmd == "witness") return cmd_witness(split);
    if (cmd == "demo") return cmd_demo(split);
    if (cmd == "oracle") return cmd_oracle(split);
    fail(ErrorKind::parse, "unknown command: " + cmd);
  } catch (const Error& e) {
    return {exit_code_for(e.kind()), "", std::string("error: ") + e.what() +
                                             "\n"};
  } catch (const std::exception& e) {
    return {1, "", std::string("internal error: ") + e.what() + "\n"};
  }
}

}  // namespace fixcalc::cli
