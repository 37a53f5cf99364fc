#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "mmp/theory.hpp"

namespace testing {

// Propositional core plus a little predicate calculus, in set.mm notation.
inline constexpr std::string_view kToySource = R"MM(
  $c ( ) -> -. wff |- /\ <-> $.
  $v ph ps ch th $.
  wph $f wff ph $.
  wps $f wff ps $.
  wch $f wff ch $.
  wth $f wff th $.
  wn $a wff -. ph $.
  wi $a wff ( ph -> ps ) $.
  ${
    min $e |- ph $.
    maj $e |- ( ph -> ps ) $.
    ax-mp $a |- ps $.
  $}
  ax-1 $a |- ( ph -> ( ps -> ph ) ) $.
  ax-2 $a |- ( ( ph -> ( ps -> ch ) ) -> ( ( ph -> ps ) -> ( ph -> ch ) ) ) $.
  ax-3 $a |- ( ( -. ph -> -. ps ) -> ( ps -> ph ) ) $.
  wb $a wff ( ph <-> ps ) $.
  wa $a wff ( ph /\ ps ) $.
  $c A. set class = e. $.
  $v x y z A B $.
  vx $f set x $.
  vy $f set y $.
  vz $f set z $.
  cA $f class A $.
  cB $f class B $.
  wal $a wff A. x ph $.
  cv $a class x $.
  wceq $a wff A = B $.
  wcel $a wff A e. B $.
  ${
    $d x ph $.
    ax-17 $a |- ( ph -> A. x ph ) $.
  $}
  ${
    idi.1 $e |- ph $.
    idi $p |- ph $= idi.1 $.
  $}
  ${
    mp2b.1 $e |- ph $.
    mp2b.2 $e |- ( ph -> ps ) $.
    mp2b.3 $e |- ( ps -> ch ) $.
    mp2b $p |- ch $=
      wps wch wph wps mp2b.1 mp2b.2 ax-mp mp2b.3 ax-mp $.
  $}
  ${
    a1i.1 $e |- ph $.
    a1i $p |- ( ps -> ph ) $=
      wph wps wph wi a1i.1 wph wps ax-1 ax-mp $.
  $}
  ${
    a2i.1 $e |- ( ph -> ( ps -> ch ) ) $.
    a2i $p |- ( ( ph -> ps ) -> ( ph -> ch ) ) $=
      wph wps wch wi wi wph wps wi wph wch wi wi a2i.1 wph wps wch ax-2 ax-mp $.
  $}
  ${
    mpd.1 $e |- ( ph -> ps ) $.
    mpd.2 $e |- ( ph -> ( ps -> ch ) ) $.
    mpd $p |- ( ph -> ch ) $=
      wph wps wi wph wch wi mpd.1 wph wps wch mpd.2 a2i ax-mp $.
  $}
  ${
    syl.1 $e |- ( ph -> ps ) $.
    syl.2 $e |- ( ps -> ch ) $.
    syl $p |- ( ph -> ch ) $=
      ( mpd a1i wi ) ABCDBCHAEGF $.
  $}
  id $p |- ( ph -> ph ) $= ( mpd wi ax-1 ) AAACZAAADAEDB $.
  ${
    $d x ph $.
    a17i.1 $e |- ph $.
    a17i $p |- A. x ph $= ? $.
  $}
)MM";

inline std::unique_ptr<mmp::Theory> toy() { return mmp::Theory::parse(kToySource); }

inline std::filesystem::path fixture_path() { return MMP_FIXTURE; }

inline const mmp::Theory& fixture() {
    static std::unique_ptr<mmp::Theory> t = mmp::Theory::load(fixture_path());
    return *t;
}

// Parse "wff ( ph -> ps )" style text against an assertion's scope.
mmp::ParseTree expr(const mmp::Theory& theory, std::string_view text, std::string_view scope_label);

}  // namespace testing
