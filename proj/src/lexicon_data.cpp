#include "artsep/lexicon.hpp"

// Built-in demo data: a small General-American SAMPA lexicon for tests and the
// toy corpus, plus the full phoneme -> manner table it relies on.

namespace artsep::detail {

const char* kBuiltinMannerTsv = R"TSV(# SAMPA phoneme -> manner-of-articulation class
# Classes: NAS APR FLP STP FRC AFR VWL
# Conventions: diphthongs and r-coloured vowels map to VWL; syllabic nasals
# to NAS; syllabic l to APR; affricates are single AFR tokens.
p	STP
b	STP
t	STP
d	STP
k	STP
g	STP
?	STP
tS	AFR
dZ	AFR
f	FRC
v	FRC
T	FRC
D	FRC
s	FRC
z	FRC
S	FRC
Z	FRC
h	FRC
m	NAS
n	NAS
N	NAS
m=	NAS
n=	NAS
N=	NAS
l	APR
l=	APR
r	APR
r\	APR
w	APR
j	APR
4	FLP
i:	VWL
i	VWL
I	VWL
e	VWL
E	VWL
{	VWL
a	VWL
A	VWL
A:	VWL
Q	VWL
O	VWL
O:	VWL
U	VWL
u	VWL
u:	VWL
V	VWL
@	VWL
3:	VWL
6	VWL
eI	VWL
aI	VWL
OI	VWL
@U	VWL
oU	VWL
aU	VWL
I@	VWL
E@	VWL
e@	VWL
U@	VWL
@r	VWL
@`	VWL
3`	VWL
o	VWL
)TSV";

const char* kBuiltinLexiconTsv = R"TSV(# word<TAB>SAMPA phonemes (General American, demo coverage only)
a	@
about	@ b aU t
after	{ f t @r
all	O: l
also	O: l s @U
and	{ n d
animal	{ n I m @ l
answer	{ n s @r
any	E n i
are	A: r
ask	{ s k
at	{ t
baby	b eI b i
back	b { k
bad	b { d
ball	b O: l
be	b i:
bear	b E r
because	b I k O: z
bed	b E d
been	b I n
before	b I f O: r
begin	b I g I n
best	b E s t
better	b E 4 @r
big	b I g
bird	b 3: d
black	b l { k
blue	b l u:
boat	b @U t
body	b A: 4 i
book	b U k
both	b @U T
boy	b OI
bread	b r E d
bring	b r I N
brother	b r V D @r
brown	b r aU n
butter	b V 4 @r
buy	b aI
by	b aI
call	k O: l
came	k eI m
can	k { n
car	k A: r
carry	k { r i
cat	k { t
catch	k { tS
chair	tS E r
change	tS eI n dZ
child	tS aI l d
children	tS I l d r @ n
city	s I 4 i
clean	k l i: n
close	k l @U z
cold	k @U l d
come	k V m
could	k U d
country	k V n t r i
cut	k V t
dark	d A: r k
day	d eI
did	d I d
dinner	d I n @r
do	d u:
does	d V z
dog	d O: g
don't	d @U n t
door	d O: r
down	d aU n
draw	d r O:
dream	d r i: m
drink	d r I N k
each	i: tS
early	3: l i
eat	i: t
eight	eI t
end	E n d
enough	I n V f
even	i: v @ n
ever	E v @r
every	E v r i
eye	aI
face	f eI s
fall	f O: l
family	f { m @ l i
far	f A: r
fast	f { s t
father	f A: D @r
feel	f i: l
few	f j u:
find	f aI n d
fire	f aI @r
first	f 3: s t
fish	f I S
five	f aI v
fly	f l aI
follow	f A: l @U
food	f u: d
foot	f U t
for	f O: r
found	f aU n d
four	f O: r
friend	f r E n d
from	f r V m
full	f U l
funny	f V n i
game	g eI m
garden	g A: r d @ n
gave	g eI v
get	g E t
girl	g 3: l
give	g I v
go	g @U
good	g U d
got	g A: t
great	g r eI t
green	g r i: n
ground	g r aU n d
group	g r u: p
grow	g r @U
had	h { d
hand	h { n d
happy	h { p i
hard	h A: r d
has	h { z
have	h { v
he	h i:
head	h E d
hear	h I r
help	h E l p
her	h 3: r
here	h I r
high	h aI
him	h I m
his	h I z
hold	h @U l d
home	h @U m
horse	h O: r s
hot	h A: t
house	h aU s
how	h aU
hundred	h V n d r @ d
ice	aI s
idea	aI d i: @
if	I f
in	I n
into	I n t u:
is	I z
it	I t
jump	dZ V m p
just	dZ V s t
keep	k i: p
kind	k aI n d
king	k I N
know	n @U
land	l { n d
large	l A: r dZ
last	l { s t
later	l eI 4 @r
laugh	l { f
learn	l 3: r n
leave	l i: v
left	l E f t
letter	l E 4 @r
life	l aI f
light	l aI t
like	l aI k
line	l aI n
listen	l I s @ n
little	l I 4 @ l
live	l I v
long	l O: N
look	l U k
love	l V v
low	l @U
made	m eI d
make	m eI k
man	m { n
many	m E n i
matter	m { 4 @r
may	m eI
me	m i:
mean	m i: n
men	m E n
might	m aI t
mind	m aI n d
miss	m I s
money	m V n i
moon	m u: n
more	m O: r
morning	m O: r n I N
most	m @U s t
mother	m V D @r
mountain	m aU n t @ n
mouse	m aU s
move	m u: v
much	m V tS
music	m j u: z I k
must	m V s t
my	m aI
name	n eI m
near	n I r
never	n E v @r
new	n u:
next	n E k s t
night	n aI t
nine	n aI n
no	n @U
north	n O: r T
not	n A: t
nothing	n V T I N
now	n aU
number	n V m b @r
of	V v
off	O: f
often	O: f @ n
old	@U l d
on	A: n
once	w V n s
one	w V n
only	@U n l i
open	@U p @ n
or	O: r
other	V D @r
our	aU r
out	aU t
over	@U v @r
own	@U n
page	p eI dZ
paper	p eI p @r
part	p A: r t
people	p i: p @ l
picture	p I k tS @r
place	p l eI s
plant	p l { n t
play	p l eI
please	p l i: z
point	p OI n t
pretty	p r I 4 i
pull	p U l
put	p U t
question	k w E s tS @ n
quick	k w I k
rain	r eI n
ran	r { n
read	r i: d
red	r E d
right	r aI t
river	r I v @r
road	r @U d
rock	r A: k
room	r u: m
round	r aU n d
run	r V n
sad	s { d
said	s E d
same	s eI m
sat	s { t
saw	s O:
say	s eI
school	s k u: l
sea	s i:
second	s E k @ n d
see	s i:
seven	s E v @ n
shall	S { l
she	S i:
ship	S I p
short	S O: r t
should	S U d
show	S @U
side	s aI d
sing	s I N
sister	s I s t @r
sit	s I t
six	s I k s
sky	s k aI
sleep	s l i: p
small	s m O: l
snow	s n @U
so	s @U
some	s V m
song	s O: N
soon	s u: n
sound	s aU n d
south	s aU T
speak	s p i: k
stand	s t { n d
star	s t A: r
start	s t A: r t
stay	s t eI
still	s t I l
stop	s t A: p
story	s t O: r i
street	s t r i: t
strong	s t r O: N
such	s V tS
summer	s V m @r
sun	s V n
sure	S U r
take	t eI k
talk	t O: k
tell	t E l
ten	t E n
than	D { n
that	D { t
the	D @
their	D E r
them	D E m
then	D E n
there	D E r
these	D i: z
they	D eI
thing	T I N
think	T I N k
third	T 3: r d
this	D I s
those	D @U z
thought	T O: t
three	T r i:
through	T r u:
time	t aI m
to	t u:
today	t @ d eI
together	t @ g E D @r
told	t @U l d
too	t u:
took	t U k
tree	t r i:
try	t r aI
turn	t 3: r n
two	t u:
under	V n d @r
until	V n t I l
up	V p
us	V s
use	j u: z
very	v E r i
voice	v OI s
walk	w O: k
want	w A: n t
warm	w O: r m
was	w V z
watch	w A: tS
water	w O: 4 @r
way	w eI
we	w i:
well	w E l
went	w E n t
were	w 3: r
what	w V t
when	w E n
where	w E r
which	w I tS
while	w aI l
white	w aI t
who	h u:
why	w aI
will	w I l
wind	w I n d
winter	w I n t @r
wish	w I S
with	w I D
word	w 3: r d
work	w 3: r k
world	w 3: r l d
would	w U d
write	r aI t
year	j I r
yellow	j E l @U
yes	j E s
you	j u:
young	j V N
your	j O: r
)TSV";

}  // namespace artsep::detail
