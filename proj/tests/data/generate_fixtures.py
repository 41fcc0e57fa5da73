#!/usr/bin/env python3
"""Regenerates the newform fixtures in this directory.

Requires the `cypari` package (PARI/GP bindings). Each fixture is written in
the repository's newform JSON schema. The "inner_twists" list is computed here
with PARI by comparing conjugated coefficients against twisted coefficients for
every prime up to TWIST_CHECK_BOUND; it serves as the oracle that the C++
detector is tested against.

Usage: generate_fixtures.py [output-dir]
"""
import itertools
import json
import sys
from fractions import Fraction
from math import gcd

from cypari import pari

COEFF_BOUND = 2000
TWIST_CHECK_BOUND = 2000

pari.allocatemem(2 * 10**9)


def gp(s):
    return pari(s)


def primes_upto(n):
    return [int(p) for p in gp(f"primes([2,{n}])")]


def prime_powers(n):
    f = gp(f"factor({n})")
    return [(int(f[0][i]), int(f[1][i])) for i in range(len(f[0]))]


def unit_group_generators(n):
    """Generator convention shared with adelic::unit_group (CRT lifts)."""
    gens = []
    for p, e in prime_powers(n):
        q = p ** e
        rest = n // q

        def lift(r):
            if rest == 1:
                return r % n
            return int(gp(f"lift(chinese(Mod({r},{q}),Mod(1,{rest})))"))

        if p == 2:
            if e == 1:
                continue
            gens.append(lift(q - 1))
            if e >= 3:
                gens.append(lift(5))
        else:
            g = 2
            while not (g % p and int(gp(f"znorder(Mod({g},{q}))")) == q // p * (p - 1)):
                g += 1
            gens.append(lift(g))
    return gens


def char_json(modulus, conrey):
    """Character of the given modulus with Conrey label `conrey`."""
    imgs = []
    for g in unit_group_generators(modulus):
        r = Fraction(str(gp(f"chareval(znstar({modulus},1),znconreylog(znstar({modulus},1),{conrey}),{g})")))
        imgs.append({"order": r.denominator, "exp": r.numerator})
    return {"modulus": modulus, "gen_images": imgs}


class Form:
    def __init__(self, N, k, conrey, index):
        self.N, self.k, self.conrey = N, k, conrey
        gp(f"mf_=mfinit([{N},{k},Mod({conrey},{N})],0); F_=mfeigenbasis(mf_)[{index + 1}];"
           f"rel_=mffields(mf_)[{index + 1}]; o_=charorder(znstar({N},1),znconreylog(znstar({N},1),{conrey}));")
        o = int(gp("o_"))
        # t is the root of polcyclo(o_, t) with t = exp(2 pi i / o_) in PARI's mf conventions.
        if o <= 2:
            gp("abspol_=subst(rel_,y,x); timg_=Mod(if(o_==2,-1,1),abspol_); yimg_=Mod(x,abspol_);")
        else:
            gp("eq_=rnfequation(nfinit(polcyclo(o_,t)),subst(rel_,y,x),1); abspol_=eq_[1];"
               "timg_=Mod(eq_[2],abspol_); yimg_=Mod(x-eq_[3]*eq_[2],abspol_);")
        gp("Zv_=varhigher(\"Z\"); rb_=polredbest(abspol_,1); abspol_=rb_[1];"
           "timg_=Mod(subst(lift(timg_),x,lift(rb_[2])),abspol_);"
           "yimg_=Mod(subst(lift(yimg_),x,lift(rb_[2])),abspol_); nf_=nfinit(abspol_);")
        gp(f"cf_=mfcoefs(F_,{COEFF_BOUND});")
        gp("toabs_(c)=Mod(substvec(lift(lift(c)),[t,y],[lift(timg_),lift(yimg_)]),abspol_);")
        # Complex embedding where t maps to exp(2 pi i / o).
        gp("rts_=polroots(abspol_); best_=1; bd_=oo;"
           "for(i=1,#rts_,d_=abs(subst(lift(timg_),x,rts_[i])-exp(2*Pi*I/o_)); if(d_<bd_,bd_=d_;best_=i));"
           "root_=rts_[best_];")
        self.deg = int(gp("poldegree(abspol_)"))
        self.pol = [int(gp(f"polcoef(abspol_,{i})")) for i in range(self.deg + 1)]
        gp(f"ap_=vector({COEFF_BOUND},n,0); forprime(p=2,{COEFF_BOUND},ap_[p]=toabs_(cf_[p+1]));")
        # Roots of unity of the field, generator = exp(2 pi i / w) under the embedding.
        gp("w_=2; for(m=3,400,if(poldegree(abspol_)%eulerphi(m)==0 && #nfroots(nf_,polcyclo(m,Zv_)),w_=lcm(w_,m)));"
           "zr_=nfroots(nf_,polcyclo(w_,Zv_)); zeta_=0;"
           "for(i=1,#zr_,if(abs(subst(lift(zr_[i]),x,root_)-exp(2*Pi*I/w_))<1e-8,zeta_=Mod(lift(zr_[i]),abspol_)));"
           "if(zeta_==0,error(\"no zeta\"));")
        self.w = int(gp("w_"))
        gp("autos_=[Mod(a,abspol_)|a<-nfgaloisconj(nf_)];")

    def coords(self, expr):
        return [str(gp(f"polcoef(lift({expr}),{i},x)")) for i in range(self.deg)]

    def inner_twists(self):
        N = self.N
        m = N if N % 2 else 4 * N
        gp(f"Gt_=znstar({m},1);")
        found = []
        nautos = int(gp("#autos_"))
        for c in range(1, m):
            if gcd(c, m) != 1:
                continue
            o = int(gp(f"charorder(Gt_,znconreylog(Gt_,{c}))"))
            if o > 2 and self.w % o:
                continue
            gp(f"chi_=znconreylog(Gt_,{c});"
               f"chv_(p)=my(r=chareval(Gt_,chi_,p)); if(r==0,Mod(1,abspol_),zeta_^(numerator(r)*(w_/denominator(r))));")
            for a in range(1, nautos + 1):
                ok = int(gp(f"my(ok=1); forprime(p=2,{TWIST_CHECK_BOUND},if({m*N}%p==0,next);"
                            f"if(Mod(subst(lift(ap_[p]),x,lift(autos_[{a}])),abspol_)!=chv_(p)*ap_[p],ok=0;break)); ok"))
                if ok:
                    found.append((a, m, c))
        return found

    def record(self, label, cm_disc):
        twists = self.inner_twists()
        rec = {
            "label": label,
            "level": self.N,
            "weight": self.k,
            "char": char_json(self.N, self.conrey),
            "field_poly": self.pol,
            "power_basis": True,
            "zeta": {"order": self.w, "coords": self.coords("zeta_")},
            "automorphisms": [self.coords(f"autos_[{a}]") for a in range(1, int(gp("#autos_")) + 1)],
            "ap": [{"l": p, "coords": self.coords(f"ap_[{p}]")} for p in primes_upto(COEFF_BOUND)],
            "inner_twists": [{"auto_image": self.coords(f"autos_[{a}]"), "char": char_json(m, c)}
                             for (a, m, c) in twists],
        }
        if cm_disc is not None:
            rec["cm_disc"] = cm_disc
        return rec


def rational_forms_sorted(N, k, conrey):
    """Indices of rational eigenforms ordered by their coefficient lists."""
    gp(f"mfs_=mfinit([{N},{k},Mod({conrey},{N})],0); B_=mfeigenbasis(mfs_); Fl_=mffields(mfs_);")
    out = []
    for i in range(int(gp("#B_"))):
        if int(gp(f"poldegree(Fl_[{i + 1}])")) == 1:
            out.append(([int(c) for c in gp(f"mfcoefs(B_[{i + 1}],60)")], i))
    out.sort()
    return out


# label, level, weight, Conrey index of the character, selector, CM discriminant
FIXTURES = [
    ("11.2.a.a", 11, 2, 1, 0, None),
    ("37.2.a.a", 37, 2, 1, "rational:0", None),
    ("23.2.a.a", 23, 2, 1, 0, None),
    ("13.2.e.a", 13, 2, 4, 0, None),
    ("32.2.a.a", 32, 2, 1, 0, -4),
    ("7.3.b.a", 7, 3, 6, 0, -7),
    ("23.1.b.a", 23, 1, 22, 0, -23),
    ("15.3.d.b", 15, 3, 11, "nonrational:0", None),
    ("26.2.a.b", 26, 2, 1, "rational:1", None),
    ("174.2.a.e", 174, 2, 1, "congruent26", None),
    ("176.2.a.b", 176, 2, 1, "twist11", None),
]


def select(N, k, conrey, sel):
    if isinstance(sel, int):
        return sel
    forms = rational_forms_sorted(N, k, conrey)
    if sel.startswith("rational:"):
        return forms[int(sel.split(":")[1])][1]
    if sel.startswith("nonrational:"):
        gp(f"mfs_=mfinit([{N},{k},Mod({conrey},{N})],0); Fl_=mffields(mfs_);")
        idx = [i for i in range(int(gp("#Fl_"))) if int(gp(f"poldegree(Fl_[{i + 1}])")) > 1]
        return idx[int(sel.split(":")[1])]
    c26 = rational_forms_sorted(26, 2, 1)[1][0]
    c11 = rational_forms_sorted(11, 2, 1)[0][0]
    for c, i in forms:
        if sel == "congruent26" and c != c26 and all(
                (c[p] ** 2 - c26[p] ** 2) % 7 == 0 for p in (5, 7, 11, 17, 19, 23, 31, 37, 41, 43, 47, 53, 59)):
            return i
        if sel == "twist11" and all(c[p] == int(gp(f"kronecker(-4,{p})")) * c11[p]
                                    for p in (3, 5, 7, 13, 17, 19, 23, 29, 31)):
            return i
    raise RuntimeError(f"no form for {sel}")


def main(outdir):
    only = set(sys.argv[2:])
    for label, N, k, conrey, sel, cm in FIXTURES:
        if only and label not in only:
            continue
        idx = select(N, k, conrey, sel)
        rec = Form(N, k, conrey, idx).record(label, cm)
        with open(f"{outdir}/{label}.json", "w") as fh:
            json.dump(rec, fh, indent=1)
        print(label, "degree", len(rec["field_poly"]) - 1, "zeta", rec["zeta"]["order"],
              "inner twists", len(rec["inner_twists"]))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
